// Write a synthetic dataset in the layout the pipeline reads.
//
//     cargo run --example generate_demo_data -- data/demo/demo.csv

use riskspread::synthetic::{generate, write_csv, write_csv_file, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SyntheticSpec::default());
    match std::env::args().nth(1).filter(|a| a.ends_with(".csv")) {
        Some(path) => {
            write_csv_file(&data, &path)?;
            println!("wrote {} months to {path}", data.target.len());
        }
        None => {
            let mut buf = Vec::new();
            write_csv(&data, &mut buf)?;
            let text = String::from_utf8(buf)?;
            for line in text.lines().take(4) {
                println!("{line}");
            }
            println!("... {} rows", text.lines().count() - 1);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
