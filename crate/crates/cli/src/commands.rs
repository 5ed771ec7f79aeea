use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use interwalk::fourier::char_fn_of;
use interwalk::limit_law::{ks_distance, ArcsineMixture, StepDensity};
use interwalk::output::{self, Table};
use interwalk::poisson::{compare_sim, dispersion_table, prop3_char_fn, protrusion};
use interwalk::spectral::{analyze_unperturbed, check_unperturbed, perturbation_report, MIN_GAP};
use interwalk::{Coin, EngineOptions, EngineRegistry, WalkParams};
use serde_json::{json, Value};

use crate::args::{
    parse_coin, parse_grid, parse_list, Common, EngineArgs, Format, LimitArgs, PoissonArgs,
    SimulateArgs, SpectralArgs,
};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Collects written files and results, then writes the JSON sidecar.
struct Run<'a> {
    common: &'a Common,
    command: &'static str,
    started: Instant,
    started_unix: f64,
    files: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(common: &'a Common, command: &'static str) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Run {
            common,
            command,
            started: Instant::now(),
            started_unix,
            files: Vec::new(),
        }
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.common.out_dir.join(format!("{stem}.{ext}"))
    }

    fn emit(&mut self, stem: &str, table: &Table) -> Result<()> {
        let path = self.path(stem, self.common.format.extension());
        match self.common.format {
            Format::Csv => table.write_csv(&path)?,
            Format::Json => table.write_json(&path)?,
        }
        self.record(&path);
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        self.files.push(path.display().to_string());
    }

    fn finish(mut self, stem: &str, config: Value, results: Value) -> Result<()> {
        let path = self.path(stem, "meta.json");
        let meta = json!({
            "command": self.command,
            "config": config,
            "versions": {
                "interwalk-cli": env!("CARGO_PKG_VERSION"),
                "interwalk-core": interwalk::VERSION,
            },
            "started_unix": self.started_unix,
            "wall_clock_s": self.started.elapsed().as_secs_f64(),
            "files": self.files,
            "results": results,
        });
        output::write_json(&path, &meta)?;
        self.record(&path);
        for f in &self.files {
            println!("{f}");
        }
        Ok(())
    }
}

fn coin_json(coin: &Coin) -> Value {
    json!({
        "reals": coin.to_reals(),
        "stay_prob": coin.stay_prob(),
        "var_ratio": if coin.stay_prob() < 1.0 { json!(coin.var_ratio()) } else { Value::Null },
    })
}

fn engine_json(e: &EngineArgs) -> Value {
    json!({
        "engine": e.engine,
        "n_traj": e.n_traj,
        "seed": e.seed,
        "exact_cap": e.exact_cap,
    })
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn label(v: f64) -> String {
    format!("{v}")
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let coin = parse_coin(&a.common.coin)?;
    let params = WalkParams::new(coin, a.p)?;
    let xi = a.xi.as_deref().map(parse_grid).transpose()?;
    let registry = EngineRegistry::with_defaults();
    let opts = a.engine.options();
    let mut run = Run::new(&a.common, "simulate");

    let out = registry.run(&a.engine.engine, &params, a.t, &opts)?;
    run.emit(&a.name, &output::distribution_table(&out.dist, out.stderr.as_deref()))?;
    if let Some(grid) = &xi {
        let rows: Vec<_> = grid.iter().map(|&x| (x, char_fn_of(&out.dist, x))).collect();
        run.emit(&format!("{}_char_fn", a.name), &output::char_fn_table(&rows))?;
    }

    let config = json!({
        "coin": coin_json(&coin),
        "p": a.p,
        "t": a.t,
        "engine": engine_json(&a.engine),
        "xi": a.xi,
        "format": format_name(a.common.format),
    });
    let results = json!({
        "engine_used": out.engine,
        "total": out.dist.total(),
        "mean": out.dist.mean(),
        "variance": out.dist.variance(),
    });
    run.finish(&a.name, config, results)
}

pub fn limit(a: &LimitArgs) -> Result<()> {
    let coin = parse_coin(&a.common.coin)?;
    let ps = parse_list::<f64>(&a.p, "p")?;
    let ts = parse_list::<usize>(&a.t, "t")?;
    if ps.is_empty() || ts.is_empty() {
        return Err(CliError::Config("limit needs at least one p and one t".into()));
    }
    let registry = EngineRegistry::with_defaults();
    let opts = a.engine.options();
    let mut run = Run::new(&a.common, "limit");
    let mut ks_rows = Vec::new();
    let mut details = Vec::new();

    for &p in &ps {
        let params = WalkParams::new(coin, p)?;
        let mixture = ArcsineMixture::from_params(&params)?;
        for &t in &ts {
            let out = registry.run(&a.engine.engine, &params, t, &opts)?;
            let step = StepDensity::new(&out.dist);
            run.emit(
                &format!("overlay_p{}_t{t}", label(p)),
                &output::overlay_table(&step, |x| mixture.f_star(x)),
            )?;
            let ks = ks_distance(&out.dist, &mixture);
            ks_rows.push((t, p, ks));
            details.push(json!({
                "p": p,
                "t": t,
                "engine_used": out.engine,
                "ks": ks,
                "support": mixture.support(),
                "mean_variance": mixture.mean_variance(),
                "variance_over_t": if t > 0 { json!(out.dist.variance() / t as f64) } else { Value::Null },
            }));
        }
    }
    run.emit("ks", &output::ks_table(&ks_rows))?;

    let config = json!({
        "coin": coin_json(&coin),
        "p": ps,
        "t": ts,
        "engine": engine_json(&a.engine),
        "format": format_name(a.common.format),
    });
    run.finish("limit", config, json!({ "runs": details }))
}

pub fn spectral(a: &SpectralArgs) -> Result<()> {
    let coin = parse_coin(&a.common.coin)?;
    let ks = parse_list::<f64>(&a.k, "k")?;
    let xis = parse_list::<f64>(&a.xi, "xi")?;
    let ps = parse_list::<f64>(&a.p, "p")?;
    let mut run = Run::new(&a.common, "spectral");
    let mut reports = Vec::new();
    let mut spectrum = Vec::new();
    let mut rows_info = Vec::new();

    for &p in &ps {
        let params = WalkParams::new(coin, p)?;
        for &k in &ks {
            let gap = analyze_unperturbed(&params, k)?.gap;
            if p > 0.0 && gap < MIN_GAP {
                spectrum.push(json!({ "p": p, "k": k, "skipped": true, "gap": gap }));
                continue;
            }
            let u = check_unperturbed(&params, k)?;
            spectrum.push(json!({
                "p": p,
                "k": k,
                "skipped": false,
                "gap": u.gap,
                "eigvec_residual": u.eigvec_residual,
                "max_other_modulus": u.max_other_modulus,
                "max_unimodular_deviation": u.max_unimodular_deviation,
            }));
            if p == 0.0 {
                continue;
            }
            for &xi in &xis {
                let r = perturbation_report(&params, k, xi, a.eps, a.ladder)?;
                rows_info.push(json!({
                    "k": k,
                    "xi": xi,
                    "p": p,
                    "l": r.l,
                    "measured_one_sided": r.measured_one_sided,
                    "richardson_order": if r.richardson_order.is_finite() { json!(r.richardson_order) } else { Value::Null },
                    "richardson_residual": if r.richardson_residual.is_finite() { json!(r.richardson_residual) } else { Value::Null },
                }));
                reports.push(r);
            }
        }
    }
    run.emit("spectral", &output::spectral_table(&reports))?;

    let max_rel = reports.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let config = json!({
        "coin": coin_json(&coin),
        "k": ks,
        "xi": xis,
        "p": ps,
        "eps": a.eps,
        "ladder_len": a.ladder,
        "format": format_name(a.common.format),
    });
    let results = json!({
        "max_rel_err": max_rel,
        "unperturbed": spectrum,
        "rows": rows_info,
    });
    run.finish("spectral", config, results)
}

pub fn poisson(a: &PoissonArgs) -> Result<()> {
    let coin = parse_coin(&a.common.coin)?;
    let xi = parse_grid(&a.xi)?;
    let s_list = parse_list::<usize>(&a.s, "s")?;
    if !(a.gamma >= 0.0 && a.gamma.is_finite()) {
        return Err(CliError::Config(format!("gamma must be finite and >= 0, got {}", a.gamma)));
    }
    let registry = EngineRegistry::with_defaults();
    let opts: EngineOptions = a.engine.options();
    let mut run = Run::new(&a.common, "poisson");

    let formula = xi
        .iter()
        .map(|&x| prop3_char_fn(&coin, a.gamma, x, a.n_k).map(|v| (x, interwalk::linalg::C64::new(v, 0.0))))
        .collect::<interwalk::Result<Vec<_>>>()?;
    run.emit("poisson_formula", &output::char_fn_table(&formula))?;

    if let Some(n) = a.dispersion {
        run.emit("dispersion", &output::dispersion_table(&dispersion_table(&coin, n)?))?;
    }

    let comparisons = compare_sim(&coin, a.gamma, &s_list, &xi, &registry, &a.engine.engine, &opts, a.n_k)?;
    let mut per_s = Vec::new();
    for c in &comparisons {
        run.emit(&format!("poisson_s{}", c.s), &output::poisson_table(&c.rows))?;
        run.emit(
            &format!("poisson_s{}_distribution", c.s),
            &output::distribution_table(&c.dist, None),
        )?;
        per_s.push(json!({
            "s": c.s,
            "p": c.p,
            "engine_used": c.engine,
            "sup_diff": c.sup_diff,
            "protrusion": protrusion(&c.dist),
        }));
    }

    let config = json!({
        "coin": coin_json(&coin),
        "gamma": a.gamma,
        "s": s_list,
        "xi": a.xi,
        "n_k": a.n_k,
        "engine": engine_json(&a.engine),
        "format": format_name(a.common.format),
    });
    run.finish("poisson", config, json!({ "comparisons": per_s }))
}

pub fn engines() -> Result<()> {
    let registry = EngineRegistry::with_defaults();
    for name in registry.names() {
        println!("{name}\t{}", registry.get(name)?.description());
    }
    println!("auto\texact up to --exact-cap, mc beyond");
    Ok(())
}
