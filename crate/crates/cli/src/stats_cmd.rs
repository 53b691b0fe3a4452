//! The `stats` subcommand: validation statistics over a labelled CSV.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Deserialize;
use serde_json::json;

use voxent_core::stats::{
    mann_whitney_u, phi, rank_biserial, spearman, ContingencyTable2x2, LabeledValues,
    MwuModeRequest,
};

use crate::{CliError, CliResult};

#[derive(Args)]
pub struct StatsArgs {
    /// CSV with header `sample_id,value,label` (label 0 = homogeneous,
    /// 1 = heterogeneous).
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Where to write the JSON report (stdout if omitted).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Value cut used to binarize `value` for the phi coefficient;
    /// defaults to the median.
    #[arg(long)]
    phi_threshold: Option<f64>,

    /// Mann-Whitney p-value route.
    #[arg(long, default_value = "auto", value_parser = parse_mode)]
    mwu_mode: MwuModeRequest,
}

fn parse_mode(s: &str) -> Result<MwuModeRequest, String> {
    match s {
        "auto" => Ok(MwuModeRequest::Auto),
        "exact" => Ok(MwuModeRequest::Exact),
        "approx" => Ok(MwuModeRequest::NormalApprox),
        other => Err(format!("unknown mode '{other}' (auto, exact, approx)")),
    }
}

#[derive(Deserialize)]
struct InputRow {
    #[allow(dead_code)]
    sample_id: String,
    value: f64,
    label: u8,
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[(sorted.len() - 1) / 2]
}

pub fn run(args: StatsArgs) -> CliResult<()> {
    let mut reader = csv::Reader::from_path(&args.input)
        .with_context(|| format!("input {}", args.input.display()))
        .map_err(CliError::Runtime)?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for row in reader.deserialize::<InputRow>() {
        let row = row
            .with_context(|| format!("parsing {}", args.input.display()))
            .map_err(CliError::Runtime)?;
        values.push(row.value);
        labels.push(row.label);
    }
    if values.is_empty() {
        return Err(CliError::usage(format!(
            "{} contains no data rows",
            args.input.display()
        )));
    }

    let data = LabeledValues::new(values.clone(), labels.clone())?;
    let label_f64: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let spearman_value = spearman(&values, &label_f64)?;
    let rb = rank_biserial(&data)?;
    let mwu = mann_whitney_u(&data, args.mwu_mode)?;

    // Phi needs two binary variables; the continuous value is binarized at
    // the median (or an explicit threshold), strictly-greater counting as 1.
    let threshold = args.phi_threshold.unwrap_or_else(|| median(&values));
    let mut table = ContingencyTable2x2::new(0, 0, 0, 0);
    for (&value, &label) in values.iter().zip(&labels) {
        let bin = value > threshold;
        match (bin, label == 1) {
            (true, true) => table.n11 += 1,
            (true, false) => table.n10 += 1,
            (false, true) => table.n01 += 1,
            (false, false) => table.n00 += 1,
        }
    }
    let phi_value = phi(&table).ok();

    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let report = json!({
        "n": values.len(),
        "n_heterogeneous": n1,
        "n_homogeneous": values.len() - n1,
        "spearman": spearman_value,
        "phi": {
            "threshold": threshold,
            "value": phi_value,
            "contingency": {
                "n11": table.n11, "n10": table.n10,
                "n01": table.n01, "n00": table.n00,
            },
        },
        "rank_biserial": rb,
        "mann_whitney": mwu,
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable report") + "\n";
    match &args.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Runtime(e.into()))?,
        None => print!("{text}"),
    }
    Ok(())
}
