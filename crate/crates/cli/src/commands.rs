use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use swing_roa::certificate::{certify, Certifier, EpsChoice};
use swing_roa::dynamics::{detect_sync, integrate, IntegrationConfig};
use swing_roa::io::{roa_csv, trajectory_csv, RandomBlock, SystemFile};
use swing_roa::roa::{
    init_frequencies, region_stats, scan, EpsPolicy, ScanMode, ScanSpec, SimParams,
};
use swing_roa::{State, SwingSystem};

use crate::args::{
    parse_list, parse_real, CheckArgs, Cli, Command, GenArgs, Mode, ScanArgs, SimulateArgs,
    StateArgs,
};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

pub const THREADS_ENV: &str = "SWING_ROA_THREADS";

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Gen(a) => gen(a),
    }
}

fn load(path: &Path) -> Result<(SystemFile, SwingSystem)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = SystemFile::parse(&text).with_context(|| format!("in {}", path.display()))?;
    let system = file
        .to_system()
        .with_context(|| format!("in {}", path.display()))?;
    Ok((file, system))
}

fn parse_eps(s: &str) -> Result<EpsChoice> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("auto") {
        return Ok(EpsChoice::Auto);
    }
    if let Some(f) = t.strip_prefix("rel:") {
        return Ok(EpsChoice::Relative(
            parse_real(f).map_err(anyhow::Error::msg)?,
        ));
    }
    Ok(EpsChoice::Value(
        parse_real(t).map_err(|e| anyhow::anyhow!("invalid eps: {e}"))?,
    ))
}

fn parse_eps_list(s: &str) -> Result<EpsPolicy> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("auto") {
        return Ok(EpsPolicy::Auto);
    }
    let list = |v: &str| parse_list(v).map_err(|e| anyhow::anyhow!("invalid eps-list: {e}"));
    match t.strip_prefix("rel:") {
        Some(rest) => Ok(EpsPolicy::Relative(list(rest)?)),
        None => Ok(EpsPolicy::Explicit(list(t)?)),
    }
}

fn initial_state(s: &SwingSystem, a: &StateArgs, derive_by_default: bool) -> Result<State> {
    let n = s.n();
    let theta = a.theta0.clone().unwrap_or_else(|| vec![0.0; n]);
    if theta.len() != n {
        bail!(
            "invalid theta0: has {} entries, expected n = {n}",
            theta.len()
        );
    }
    let omega = match a.omega0.as_deref().map(str::trim) {
        Some("derive") => init_frequencies(s, &theta).omega,
        None if derive_by_default => init_frequencies(s, &theta).omega,
        None => vec![0.0; n],
        Some(list) => {
            let w = parse_list(list).map_err(|e| anyhow::anyhow!("invalid omega0: {e}"))?;
            if w.len() != n {
                bail!("invalid omega0: has {} entries, expected n = {n}", w.len());
            }
            w
        }
    };
    Ok(State::new(theta, omega))
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn write_to(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let k: usize = v
                .trim()
                .parse()
                .with_context(|| format!("invalid {THREADS_ENV}: `{v}`"))?;
            if k == 0 {
                bail!("invalid {THREADS_ENV}: must be >= 1");
            }
            Ok(Some(k))
        }
        _ => Ok(None),
    }
}

fn check(a: CheckArgs) -> Result<u8> {
    let (_, s) = load(&a.system)?;
    let eps = parse_eps(&a.eps)?;
    let x0 = initial_state(&s, &a.state, false)?;
    let report = certify(&s, &x0, a.d0, eps)?;
    print!("{}", to_json(&report));
    Ok(if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let (_, s) = load(&a.system)?;
    let x0 = initial_state(&s, &a.state, true)?;
    let eps = Certifier::new(&s, a.d0, parse_eps(&a.eps)?)?
        .eps()
        .unwrap_or(1.0);
    let cfg = IntegrationConfig {
        dt: a.dt,
        horizon: a.horizon,
        record_every: a.record_every,
        eps,
    };
    let tr = integrate(&s, &x0, &cfg)?;
    let sync = detect_sync(&tr, a.tol);
    let mut report = serde_json::to_value(&sync)?;
    if let Value::Object(map) = &mut report {
        map.insert("etilde_eps".into(), json!(eps));
        map.insert("monitors".into(), serde_json::to_value(tr.summary)?);
        map.insert("freq_bound".into(), json!(tr.freq_bound));
    }
    let csv = trajectory_csv(&tr);
    let report = to_json(&report);
    match &a.output {
        Some(p) => write_to(p, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    match (&a.report, &a.output) {
        (Some(p), _) => write_to(p, &report)?,
        (None, Some(_)) => print!("{report}"),
        (None, None) => eprint!("{report}"),
    }
    Ok(EXIT_PASS)
}

fn scan_cmd(a: ScanArgs) -> Result<u8> {
    let (file, s) = load(&a.system)?;
    let spec = ScanSpec {
        theta_range: [(a.theta_min, a.theta_max); 2],
        resolution: a.res,
        d0_list: a.d0_list.clone(),
        eps_policy: parse_eps_list(&a.eps_list)?,
        seed: file.seed,
        sim: SimParams {
            dt: a.dt,
            horizon: a.horizon,
            tol: a.tol,
        },
        threads: threads_from_env()?,
    };
    let mode = match a.mode {
        Mode::Cert => ScanMode::Cert,
        Mode::Sim => ScanMode::Sim,
        Mode::Both => ScanMode::Both,
    };
    let map = scan(&s, &spec, mode)?;
    let stats = region_stats(&map);
    let meta = to_json(&json!({
        "seed": file.seed,
        "mode": mode,
        "system": SystemFile { seed: file.seed, random: file.random.clone(), ..SystemFile::from_system(&s) },
        "spec": spec,
        "combos": map.combos,
        "stats": stats,
    }));

    let csv = roa_csv(&map);
    match &a.output {
        Some(p) => write_to(p, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    let meta_path: Option<PathBuf> = a.meta.clone().or_else(|| {
        a.output.as_ref().map(|p| {
            let mut os = p.clone().into_os_string();
            os.push(".json");
            PathBuf::from(os)
        })
    });
    match meta_path {
        Some(p) => write_to(&p, &meta)?,
        None => eprint!("{meta}"),
    }

    for c in &stats.combos {
        let ratio = c
            .conservativeness
            .map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        eprintln!(
            "{}: admissible {}, certified {}/{}, conservativeness {ratio}",
            c.label, c.admissible, c.certified, stats.cells
        );
    }
    if let Some(n) = stats.simulated_synced {
        eprintln!("simulated synced {n}/{}", stats.cells);
    }
    for v in &stats.nesting_violations {
        eprintln!(
            "nesting ({}): {} cells of {} outside {}",
            v.axis, v.cells, v.inner, v.outer
        );
    }
    if mode == ScanMode::Both && stats.soundness_violations > 0 {
        eprintln!(
            "SOUNDNESS VIOLATION: {} certified cells failed to synchronize",
            stats.soundness_violations
        );
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_PASS)
}

fn gen(a: GenArgs) -> Result<u8> {
    let defaults = RandomBlock::standard();
    let block = RandomBlock {
        m_range: a.m_range.unwrap_or(defaults.m_range),
        d_range: a.d_range.unwrap_or(defaults.d_range),
        coupling_value: a.coupling.unwrap_or(defaults.coupling_value),
        omega_norm: a.omega_norm,
    };
    let file = SystemFile::generate(a.n, a.seed, block)?;
    println!("{}", file.to_json());
    Ok(EXIT_PASS)
}
