use green_transition::run::{run, with_parameter, Command, RunError};
use green_transition::scenario::{parse_scenario, PolicyParams, ScenarioError, SeedState, SweepParameter, REF1};

fn toml_blocks(markdown: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in markdown.lines() {
        match (&mut current, line.trim_start()) {
            (None, "```toml") => current = Some(String::new()),
            (Some(_), "```") => blocks.push(current.take().unwrap()),
            (Some(buf), _) => {
                buf.push_str(line);
                buf.push('\n');
            }
            _ => {}
        }
    }
    blocks
}

#[test]
fn documented_scenario_matches_the_shipped_fixture() {
    let chapter = include_str!("../../../book/src/scenarios.md");
    let blocks = toml_blocks(chapter);
    assert_eq!(blocks.len(), 1);
    let documented = parse_scenario(&blocks[0]).unwrap();
    let shipped = parse_scenario(REF1).unwrap();
    assert_eq!(documented, shipped);
}

#[test]
fn explicit_seed_requires_levels() {
    let text = REF1.replace("seed = \"brown-sse\"", "seed = \"explicit\"");
    let err = parse_scenario(&text).unwrap_err();
    assert!(err.to_string().contains("requires b_prev and h_prev"), "{err}");
    let text = REF1.replace("seed = \"brown-sse\"", "seed = \"explicit\"\nb_prev = 0.5\nh_prev = 0.0");
    let doc = parse_scenario(&text).unwrap();
    let result = run(Command::Simulate, &doc).unwrap();
    let mu0 = result.records[0].mu;
    assert!((mu0 - (-0.1f64).exp()).abs() < 1e-12);
}

#[test]
fn levels_are_only_read_with_an_explicit_seed() {
    let text = REF1.replace("seed = \"brown-sse\"", "seed = \"pristine\"\nb_prev = 0.5\nh_prev = 0.0");
    assert!(matches!(parse_scenario(&text), Err(ScenarioError::Invalid(_))));
}

#[test]
fn sweeping_the_norm_limit_moves_the_barrier() {
    let text =
        REF1.replace("parameter = \"tau\"\nfrom = 0.0\nto = 0.5", "parameter = \"lambda_inf\"\nfrom = 2.0\nto = 3.0");
    let doc = parse_scenario(&text).unwrap();
    let result = run(Command::Sweep, &doc).unwrap();
    let sweep = result.summary.sweep.unwrap();
    assert_eq!(sweep.parameter, "lambda_inf");
    let barriers: Vec<f64> = sweep
        .points
        .iter()
        .filter_map(|p| p.fixed_points.iter().find(|f| f.j > 0.0 && f.j < 1.0).map(|f| f.j))
        .collect();
    assert_eq!(barriers.len(), 51);
    // A stronger norm lowers the tipping threshold.
    assert!(barriers.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_points_that_break_the_curves_are_reported() {
    let text =
        REF1.replace("parameter = \"tau\"\nfrom = 0.0\nto = 0.5", "parameter = \"gamma_min\"\nfrom = 0.5\nto = 2.0");
    let doc = parse_scenario(&text).unwrap();
    match run(Command::Sweep, &doc) {
        Err(RunError::Validation(errors)) => assert!(errors.iter().any(|e| e.contains("gamma strictly decreasing"))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tau_override_reaches_constant_policies() {
    let mut doc = parse_scenario(REF1).unwrap();
    doc.policy = PolicyParams::Constant { tau: 0.0 };
    doc.initial.seed = SeedState::Pristine;
    doc.override_tau(3.0);
    assert_eq!(doc.policy, PolicyParams::Constant { tau: 3.0 });
    let result = run(Command::Simulate, &doc).unwrap();
    assert_eq!(result.records[1].j, 1.0);
    assert_eq!(with_parameter(&doc, SweepParameter::Tau, 0.2).tau, 0.2);
}

#[test]
fn the_sweep_command_needs_a_sweep_section() {
    let text = REF1[..REF1.find("[sweep]").unwrap()].to_string();
    let doc = parse_scenario(&text).unwrap();
    assert!(matches!(run(Command::Sweep, &doc), Err(RunError::Validation(_))));
}
