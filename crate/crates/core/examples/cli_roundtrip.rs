// Drives the command-line interface in-process: sample a graph, check its
// degrees, then fit them.

use maxent_graphs::cli::run;
use maxent_graphs::Result;

pub fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("maxent-graphs-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let theta = dir.join("theta.csv");
    let degrees = dir.join("degrees.csv");
    let graph = dir.join("graph.json");
    std::fs::write(&theta, "0.2,0.4,0.6,0.8,1.0,0.3\n")?;

    let s = |p: &std::path::Path| p.to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["sample", "--regime", "infinite", "--theta", &s(&theta), "--seed", "4", "--out", &s(&graph), "--degrees-out", &s(&degrees)]
            .into_iter().map(String::from).collect(),
        vec!["check", "--regime", "infinite", "--degrees", &s(&degrees)].into_iter().map(String::from).collect(),
        vec!["fit", "--regime", "infinite", "--degrees", &s(&degrees)].into_iter().map(String::from).collect(),
        vec!["mean", "--regime", "finite", "--r", "5", "--t", "0"].into_iter().map(String::from).collect(),
    ];
    for args in steps {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("maxent-graphs".to_string()).chain(args.iter().cloned()), &mut out, &mut err);
        println!("$ maxent-graphs {}\n  exit {code}", args[0]);
        print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
