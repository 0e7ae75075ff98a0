use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use serde_json::{json, Value};

use cohort_forge::coarsen::{hyperedge_coarsen, modified_hyperedge_coarsen, monte_carlo_best_choice, to_dot};
use cohort_forge::community::CommunityFile;
use cohort_forge::format::round_sig6;
use cohort_forge::lab::{run_sweep, SweepSpec};
use cohort_forge::quality::QualityFile;
use cohort_forge::{anneal, build_network, read_enrollment_csv, score, CommunitySet, EnrollmentNetwork};

use crate::config::{Action, Algorithm, Format, RunConfig, SeedSource};
use crate::error::{CliError, CliResult};

pub fn run(action: Action, cfg: &RunConfig) -> CliResult<()> {
    match action {
        Action::Build => build(cfg),
        Action::Cluster => cluster(cfg),
        Action::Refine => refine(cfg),
        Action::Sweep => sweep(cfg),
        Action::Report => report(cfg),
    }
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn load_network(cfg: &RunConfig) -> CliResult<EnrollmentNetwork> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("no enrollment file given, pass --input".into()))?;
    let file = File::open(path).map_err(|e| input_error(path, e))?;
    let table = read_enrollment_csv(BufReader::new(file)).map_err(|e| match CliError::from(e) {
        CliError::Input(msg) => input_error(path, msg),
        other => other,
    })?;
    Ok(build_network(&table, &cfg.network)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_error(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| input_error(&path, e))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write(dir, name, &text)
}

fn to_value(x: impl serde::Serialize) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn network_meta(cfg: &RunConfig, net: &EnrollmentNetwork) -> Value {
    let mut drop: Vec<&str> = cfg.network.drop_kinds.iter().map(|k| k.code()).collect();
    drop.sort_unstable();
    json!({
        "variant": to_value(net.variant()),
        "max_section_size": cfg.network.max_section_size,
        "drop_kinds": drop,
        "entities": net.entity_count(),
        "sections": net.section_count(),
    })
}

fn seed_meta(cfg: &RunConfig) -> Value {
    json!({ "seed": cfg.seed, "seed_source": cfg.seed_source.to_string() })
}

fn announce_seed(cfg: &RunConfig) {
    if cfg.seed_source == SeedSource::Auto {
        eprintln!("seed {} (generated; pass --seed {} to replay)", cfg.seed, cfg.seed);
    }
}

fn build(cfg: &RunConfig) -> CliResult<()> {
    let net = load_network(cfg)?;
    let summary = json!({
        "entities": net.entity_count(),
        "sections": net.section_count(),
        "edges": net.edge_count(),
        "total_weight": net.total_weight(),
        "isolated_entities": net.isolated_entities().len(),
        "network": network_meta(cfg, &net),
    });
    write_json(&cfg.out, "network.json", &net.to_json())?;
    write_json(&cfg.out, "summary.json", &summary)?;
    println!(
        "{} entities, {} sections, {} edges, {} isolated",
        net.entity_count(),
        net.section_count(),
        net.edge_count(),
        net.isolated_entities().len()
    );
    Ok(())
}

/// Run the configured creation algorithm and describe the run.
fn create(cfg: &RunConfig, net: &EnrollmentNetwork) -> CliResult<(CommunitySet, Value)> {
    let mut meta = json!({ "algorithm": cfg.algorithm.name() });
    let set = match cfg.algorithm {
        Algorithm::Hc => hyperedge_coarsen(net),
        Algorithm::Mhc => modified_hyperedge_coarsen(net),
        Algorithm::Bc => {
            let mc = monte_carlo_best_choice(net, &cfg.bc, cfg.mc_runs)?;
            meta["best_choice"] = json!({
                "score_fn": to_value(cfg.bc.score_fn),
                "max_size": cfg.bc.max_size,
                "seed": cfg.bc.seed,
                "runs": cfg.mc_runs,
                "best_run": mc.best_run,
                "mean": round_sig6(mc.stats.mean),
                "std": round_sig6(mc.stats.std),
                "best": mc.stats.best,
            });
            mc.best
        }
    };
    Ok((set, meta))
}

fn write_communities(cfg: &RunConfig, net: &EnrollmentNetwork, set: &CommunitySet, meta: Value) -> CliResult<i64> {
    let ids = net.entities();
    let report = score(set, net)?;
    let mut communities = to_value(set.to_file(ids));
    communities["meta"] = meta;
    write_json(&cfg.out, "communities.json", &communities)?;
    write_json(&cfg.out, "quality.json", &to_value(report.to_file(set, ids)))?;
    if cfg.formats.contains(&Format::Csv) {
        let mut csv = String::from("entity_id,community\n");
        for (e, id) in ids.iter().enumerate() {
            csv.push_str(&format!("{id},{}\n", set.community_of(e)));
        }
        write(&cfg.out, "membership.csv", &csv)?;
    }
    if cfg.formats.contains(&Format::Dot) {
        write(&cfg.out, "communities.dot", &to_dot(set, net, &report))?;
    }
    Ok(report.total)
}

fn cluster(cfg: &RunConfig) -> CliResult<()> {
    announce_seed(cfg);
    let net = load_network(cfg)?;
    let (set, mut meta) = create(cfg, &net)?;
    meta["command"] = json!("cluster");
    meta["network"] = network_meta(cfg, &net);
    meta["run"] = seed_meta(cfg);
    let total = write_communities(cfg, &net, &set, meta)?;
    println!("{} communities, S_T = {total}", set.community_count());
    Ok(())
}

fn refine(cfg: &RunConfig) -> CliResult<()> {
    announce_seed(cfg);
    let net = load_network(cfg)?;
    let (start, start_meta) = match &cfg.communities {
        Some(path) => {
            let file: CommunityFile = read_json(path)?;
            let set = CommunitySet::from_file(&file, net.entities())
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            (set, json!({ "file": path.display().to_string() }))
        }
        None => create(cfg, &net)?,
    };
    let start_score = score(&start, &net)?.total;
    let outcome = anneal(&start, &net, &cfg.sa)?;
    let trace = &outcome.trace;
    let estimate = trace.estimate.expect("anneal estimates its temperature");
    let meta = json!({
        "command": "refine",
        "network": network_meta(cfg, &net),
        "run": seed_meta(cfg),
        "start": start_meta,
        "start_score": start_score,
        "refined_score": -outcome.best_cost,
        "last_score": -outcome.last_cost,
        "annealing": {
            "n": cfg.sa.trial_swaps,
            "ap": round_sig6(cfg.sa.acceptance_probability),
            "alpha": round_sig6(cfg.sa.cooling_rate),
            "tmin": round_sig6(cfg.sa.min_temperature),
            "iters": cfg.sa.iters_per_temp,
            "seed": cfg.sa.seed,
            "t0": round_sig6(estimate.t0),
            "t0_clamped": estimate.clamped,
            "mean_trial_cost": round_sig6(estimate.mean_trial_cost),
            "cooling_steps": trace.temperatures.len(),
            "moves": trace.moves.len(),
            "accepted": trace.accepted_count,
            "rejected": trace.rejected_count,
        },
    });
    if estimate.clamped {
        eprintln!(
            "warning: trial swaps did not raise the cost on average; starting at temperature {}",
            cfg.sa.temperature_floor
        );
    }
    let total = write_communities(cfg, &net, &outcome.best, meta)?;
    write(&cfg.out, "trace.csv", &trace.to_csv())?;
    println!("S_T {start_score} -> {total} over {} moves", trace.moves.len());
    Ok(())
}

fn read_spec(path: &Path) -> CliResult<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: invalid sweep spec: {e}", path.display())))
}

fn sweep(cfg: &RunConfig) -> CliResult<()> {
    let path = cfg
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Config("no sweep spec given, pass --spec".into()))?;
    let mut spec = read_spec(path)?;
    if cfg.seed_source != SeedSource::Auto {
        spec.seed = cfg.seed;
    }
    spec.validate()?;
    let net = load_network(cfg)?;
    let report = run_sweep(&net, &spec)?;
    let mut out = report.to_json(cfg.timings);
    out["meta"] = json!({
        "command": "sweep",
        "network": network_meta(cfg, &net),
        "runs_per_value": spec.runs_per_value,
        "start_runs": spec.start_runs,
        "base_bc": to_value(spec.base_bc),
        "base_sa": {
            "n": spec.base_sa.trial_swaps,
            "ap": round_sig6(spec.base_sa.acceptance_probability),
            "alpha": round_sig6(spec.base_sa.cooling_rate),
            "tmin": round_sig6(spec.base_sa.min_temperature),
            "iters": spec.base_sa.iters_per_temp,
        },
    });
    write_json(&cfg.out, "sweep.json", &out)?;
    if cfg.formats.contains(&Format::Csv) {
        write(&cfg.out, "sweep.csv", &report.to_csv())?;
    }
    println!("{} sweep over {} values", report.target.name(), report.rows.len());
    Ok(())
}

fn report(cfg: &RunConfig) -> CliResult<()> {
    let quality: QualityFile = match (&cfg.quality, &cfg.communities) {
        (Some(path), _) => read_json(path)?,
        (None, Some(path)) => {
            let net = load_network(cfg)?;
            let file: CommunityFile = read_json(path)?;
            let set = CommunitySet::from_file(&file, net.entities())
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            score(&set, &net)?.to_file(&set, net.entities())
        }
        (None, None) => {
            return Err(CliError::Config(
                "report needs --quality, or --communities with --input".into(),
            ))
        }
    };
    print!("{}", render(&quality));
    Ok(())
}

fn render(q: &QualityFile) -> String {
    let mut out = format!("{:<8} {:>6} {:>10} {:>10} {:>10}\n", "LC", "size", "internal", "external", "S_I-S_E");
    for c in &q.communities {
        out.push_str(&format!(
            "{:<8} {:>6} {:>10} {:>10} {:>10}\n",
            format!("LC{}", c.id),
            c.members.len(),
            c.internal,
            c.external,
            c.internal as i64 - c.external as i64
        ));
    }
    out.push_str(&format!("S_T = {}, Cost = {}\n", q.total, q.cost));
    out
}
