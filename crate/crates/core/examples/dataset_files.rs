//! Round trip through the text dataset format and the command-line entry
//! point.

use dsplim::cli::{parse_dataset_str, run, write_dataset_file};
use dsplim::ds_limits::{ChannelObservation, Dataset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [(5, 10, 100, 1, 3, 12), (0, 12, 95, 2, 0, 9), (9, 8, 104, 0, 2, 11)];
    let datasets: Vec<Dataset> = rows
        .iter()
        .enumerate()
        .map(|(i, &(n1, y1, z1, n2, y2, z2))| {
            Dataset::new(
                vec![ChannelObservation::new(n1, y1, z1, 33.0, 100.0)?, ChannelObservation::new(n2, y2, z2, 3.3, 10.0)?],
                i.to_string(),
            )
        })
        .collect::<dsplim::Result<_>>()?;
    let text = write_dataset_file(&datasets)?;
    print!("{text}");
    assert_eq!(parse_dataset_str(&text)?, datasets);

    let dir = std::env::temp_dir().join("dsplim-example");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("datasets.txt");
    std::fs::write(&input, &text)?;
    let code = run(["dsplim", "limits", "--input", input.to_str().unwrap(), "--quantiles", "0.9,0.95"]);
    println!("exit code {code}");
    Ok(())
}
