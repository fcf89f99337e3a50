//! Scenario runner on an inline TOML description: light arrives from both
//! sides of a half-silvered mirror. Outputs go to a temporary directory.

use locmirror::scenario::{run, RunOptions, Scenario};

const SCENARIO: &str = r#"
[grid]
n = 1024
dx = 0.5

[[packets]]
name = "left"
type = "gaussian"
channel = "+1/H"
center = -60.0
width = 3.0
carrier = 3.0

[[packets]]
name = "right"
type = "gaussian"
channel = "-1/V"
center = 100.0
width = 3.0
carrier = 3.0
amplitude = [0.0, 0.8]

[mirror]
type = "bump"
half_cells = 4
theta = 0.7853981633974483

[[schedule]]
action = "snapshot"
label = "incident"

[[schedule]]
action = "mirror-evolve"
duration = 160.0

[outputs]
states = "none"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("locmirror-two-sided");
    let scenario = Scenario::parse(SCENARIO, std::path::Path::new("."))?;
    let report = run(&scenario, &out, &RunOptions::default())?;
    for row in &report.ledger {
        println!(
            "{:>9} t = {:6.1}  E = {:.10}  right-moving {:.6}  left-moving {:.6}",
            row.label, row.time, row.energy_total, row.fractions[0], row.fractions[1]
        );
    }
    for w in &report.warnings {
        println!("warning: {}", w.to_json());
    }
    println!("{} files in {}", report.files.len(), out.display());
    Ok(())
}
