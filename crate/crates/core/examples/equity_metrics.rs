// Equity curves, the Modified Sharpe Index, Excess Predictability and the
// least-squares baseline on a hand-made forecast.

use riskspread::metrics::{
    directional_accuracy, excess_predictability_from, modified_sharpe, ols_fit, score_forecasts,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let actual: Vec<f64> = (0..25).map(|i| 900.0 + 80.0 * (i as f64 / 2.5).sin()).collect();
    let previous = &actual[..24];
    let realized = &actual[1..];
    // right direction except every fifth month
    let forecast: Vec<f64> = realized
        .iter()
        .zip(previous)
        .enumerate()
        .map(|(i, (a, p))| if i % 5 == 4 { p - (a - p) } else { p + 0.5 * (a - p) })
        .collect();

    let report = score_forecasts(&forecast, realized, previous, None)?;
    println!("eq ends {:.2}%, pe ends {:.2}%", report.eq.last().unwrap(), report.pe.last().unwrap());
    println!("{} failures, average negative volatility {:.4}", report.failures.len(), report.ave_negative_vol);
    println!("ISM {}", modified_sharpe(&report)?);

    let ep = excess_predictability_from(&report.positions, &report.returns)?;
    println!("EP statistic {:.3}, normalized {:.2}%", ep.statistic, ep.norm_ep);

    let pred_change: Vec<f64> = forecast.iter().zip(previous).map(|(f, p)| f - p).collect();
    let real_change: Vec<f64> = realized.iter().zip(previous).map(|(a, p)| a - p).collect();
    println!("hit rate {:.2}", directional_accuracy(&pred_change, &real_change)?);

    let fit = ols_fit(&forecast, realized)?;
    println!(
        "realized = {:.2} + {:.3} (forecast - {:.2}), r^2 {:.3}, p {:.2e}",
        fit.intercept, fit.slope, fit.x_mean, fit.r_squared, fit.p_value
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
