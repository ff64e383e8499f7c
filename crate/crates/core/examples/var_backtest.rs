// Rolling historical VaR of a simulated indicator, its smoothed band, and
// the window/beta grid search scored by mean absolute error.

use riskspread::preprocess::{grid_search_var_params, historical_var, VarConfig};
use riskspread::series::{log_returns, positive_component, to_basis_points};
use riskspread::synthetic::{generate, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SyntheticSpec::default());
    let returns = to_basis_points(&log_returns(&data.igaem)?);

    let cfg = VarConfig::default();
    let var = historical_var(&returns, &cfg)?;
    println!(
        "{} monthly VaR values from {} to {}, last {:.1} bp",
        var.len(),
        var.start(),
        var.end(),
        var.values().last().unwrap()
    );
    // a month breaches when its fall exceeds the VaR known one month earlier
    let falls = positive_component(&returns);
    let breaches = var
        .observations()
        .iter()
        .filter(|(m, band)| falls.get(m.offset(1)).is_some_and(|f| f > *band))
        .count();
    println!("{breaches} breaches in {} months", var.len() - 1);

    let grid = grid_search_var_params(returns.values(), 30..=65, &[0.05, 0.1, 0.2, 0.4], 0.95, None)?;
    let best = grid.best_cell();
    println!(
        "best window {} beta {}: EAM {:.2} bp, {} outliers in {} months",
        best.window, best.beta, best.eam, best.outliers, best.evaluated
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
