use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use pbropt_core::controller::{simulate_closed_loop, ControlConfig, SimOptions, SimTrace, CONVERGENCE_BAND};
use pbropt_core::light::{fit_alpha0, ExtinctionModel, DEFAULT_FIT_POINTS, DEFAULT_FIT_RANGE};
use pbropt_core::optimizer::{
    alternate, optimal_depth_for_x, optimal_x_for_h, y_opt, AlternateOptions, BracketPolicy, DepthFloor, YOptBranch,
};
use pbropt_core::params::{ParamsFile, Preset};
use pbropt_core::productivity::Scenario;

use crate::format::num;
use crate::output::{json_num, Format, Outputs, RunManifest, Table};
use crate::{Cli, Command, GlobalArgs};

const DEFAULT_PRESET: &str = "table1-R-x10";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    /// Growth and optical-depth productivity against optical depth.
    #[value(name = "P_of_Y")]
    POfY,
    /// Surface productivity against depth at fixed concentration.
    #[value(name = "Pi_of_h")]
    PiOfH,
    /// Surface productivity against concentration at fixed depth.
    #[value(name = "Pi_of_X")]
    PiOfX,
    /// Surface productivity on a concentration by depth grid.
    #[value(name = "Pi_surface")]
    PiSurface,
    /// Best surface productivity at fixed concentration against turbidity.
    #[value(name = "Pi_vs_alpha1")]
    PiVsAlpha1,
    /// Extinction against concentration, one curve per exponent.
    #[value(name = "eps_of_X")]
    EpsOfX,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    /// Lower end of the swept variable.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Upper end of the swept variable.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Number of points, ends included.
    #[arg(long)]
    pub n: Option<usize>,
    /// Fixed concentration [g/m^3].
    #[arg(long, default_value_t = 50.0)]
    pub x: f64,
    /// Fixed depth [m].
    #[arg(long, default_value_t = 0.1)]
    pub h: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h_lo: f64,
    #[arg(long, default_value_t = 0.5)]
    pub h_hi: f64,
    #[arg(long, default_value_t = 100)]
    pub h_n: usize,
    /// Extinction exponents for eps_of_X.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1")]
    pub s_values: Vec<f64>,
}

struct Resolved {
    file: ParamsFile,
    scenario: Scenario,
    preset: Option<String>,
}

fn resolve(g: &GlobalArgs) -> Result<Resolved> {
    let (mut file, preset) = match &g.params {
        Some(path) => (ParamsFile::load(path)?, None),
        None => {
            let name = g.preset.as_deref().unwrap_or(DEFAULT_PRESET);
            (Preset::from_name(name)?.file(), Some(name.to_string()))
        }
    };
    if let Some(s) = g.s {
        file.s = Some(s);
        file.alpha0_m2_per_g = None;
    }
    if let Some(a) = g.alpha0 {
        file.alpha0_m2_per_g = Some(a);
    }
    if let Some(a) = g.alpha1 {
        file.alpha1_per_m = Some(a);
    }
    if let Some(is) = g.surface_light {
        file.i_s_umol_per_m2_s = Some(is);
    }
    let scenario = file.scenario()?;
    Ok(Resolved { file, scenario, preset })
}

fn points(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        bail!("malformed range: need lo < hi (got {lo}, {hi})");
    }
    if n < 2 {
        bail!("malformed range: need at least 2 points (got {n})");
    }
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<()> {
    let res = resolve(&cli.global)?;
    let mut out = Outputs::new(&cli.global.out, cli.global.format)?;
    let name = match &cli.command {
        Command::Yopt { scan, scan_max, scan_step } => {
            yopt(&res.scenario, *scan, *scan_max, *scan_step, &mut out)?;
            "yopt"
        }
        Command::Sweep(args) => {
            sweep(&res.scenario, args, &mut out)?;
            "sweep"
        }
        Command::Optimize { h, x } => {
            optimize(&res.scenario, *h, *x, &mut out)?;
            "optimize"
        }
        Command::Alternate { x0, n_max, h_min, cap } => {
            run_alternate(&res.scenario, *x0, *n_max, h_min.as_deref(), *cap, &mut out)?;
            "alternate"
        }
        Command::Simulate { x0, h, t_end, d_max, x_star, x_bar } => {
            simulate(&res.scenario, *x0, *h, *t_end, *d_max, *x_star, *x_bar, &mut out)?;
            "simulate"
        }
        Command::Params => {
            let text = res.file.to_toml();
            print!("{text}");
            out.raw("params.toml", |w| w.write_all(text.as_bytes()))?;
            "params"
        }
    };
    let manifest = RunManifest {
        command: name.to_string(),
        params_file: cli.global.params.clone(),
        preset: res.preset,
        outputs: out.written.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        arguments: argv.to_vec(),
        parameters: res.file.to_toml(),
    };
    let path = out.dir.join(format!("{name}_manifest.json"));
    crate::output::write_json(&path, &manifest)?;
    Ok(())
}

fn emit<T: Serialize>(out: &mut Outputs, file: &str, value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    out.json(file, value)?;
    Ok(())
}

fn yopt(sc: &Scenario, scan: bool, scan_max: f64, scan_step: f64, out: &mut Outputs) -> Result<()> {
    let p = &sc.growth;
    let r = y_opt(p, sc.surface_light)?;
    let mut doc = json!({
        "Y_opt": json_num(r.y_opt),
        "branch": match r.branch {
            YOptBranch::SurfaceAboveR => "surface_above_r",
            YOptBranch::SurfaceAtOrBelowR => "surface_at_or_below_r",
        },
        "I_bottom": json_num(r.bottom_light),
        "mu_at_bottom": json_num(p.growth_rate(r.bottom_light)),
        "R": json_num(p.respiration),
        "P_at_Y_opt": json_num(sc.optical_productivity(r.y_opt)),
    });
    if scan {
        if !(scan_step > 0.0) || !(scan_max > scan_step) {
            bail!("malformed scan: need 0 < step < max (got step {scan_step}, max {scan_max})");
        }
        let n = (scan_max / scan_step).round() as usize;
        let (mut best_y, mut best_p) = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let y = i as f64 * scan_step;
            let v = sc.optical_productivity(y);
            if v > best_p {
                (best_y, best_p) = (y, v);
            }
        }
        doc["scan_argmax"] = json_num(best_y);
        doc["scan_max_P"] = json_num(best_p);
        doc["scan_agrees"] = json!((best_y - r.y_opt).abs() <= 1e-4);
    }
    emit(out, "yopt.json", &doc)
}

fn sweep(sc: &Scenario, a: &SweepArgs, out: &mut Outputs) -> Result<()> {
    let range = |lo: f64, hi: f64, n: usize| points(a.lo.unwrap_or(lo), a.hi.unwrap_or(hi), a.n.unwrap_or(n));
    let p = &sc.growth;
    match a.kind {
        SweepKind::POfY => {
            let mut t = Table::new(vec![
                ("Y", "optical depth [-]"),
                ("mu", "growth at depth Y [1/d]"),
                ("P", "optical-depth productivity [1/d]"),
            ]);
            for y in range(0.0, 20.0, 2001)? {
                t.push(vec![y, p.growth_rate(sc.surface_light * (-y).exp()), sc.optical_productivity(y)]);
            }
            out.table("P_of_Y", &t)?;
        }
        SweepKind::PiOfH => {
            let mut t = Table::new(vec![
                ("h", "depth [m]"),
                ("Y", "optical depth [-]"),
                ("Pi", "surface productivity [g/m^2/d]"),
            ]);
            for h in range(0.01, 1.0, 500)? {
                t.push(vec![h, sc.optical_depth(a.x, h), sc.surface_productivity(a.x, h)]);
            }
            out.table("Pi_of_h", &t)?;
        }
        SweepKind::PiOfX => {
            let mut t = Table::new(vec![
                ("X", "concentration [g/m^3]"),
                ("Y", "optical depth [-]"),
                ("Pi", "surface productivity [g/m^2/d]"),
            ]);
            for x in range(0.0, 2000.0, 501)? {
                t.push(vec![x, sc.optical_depth(x, a.h), sc.surface_productivity(x, a.h)]);
            }
            out.table("Pi_of_X", &t)?;
        }
        SweepKind::PiSurface => {
            let mut t = Table::new(vec![
                ("X", "concentration [g/m^3]"),
                ("h", "depth [m]"),
                ("Pi", "surface productivity [g/m^2/d]"),
            ]);
            let hs = points(a.h_lo, a.h_hi, a.h_n)?;
            for x in range(0.0, 2000.0, 101)? {
                for &h in &hs {
                    t.push(vec![x, h, sc.surface_productivity(x, h)]);
                }
            }
            out.table("Pi_surface", &t)?;
        }
        SweepKind::PiVsAlpha1 => {
            let mut t = Table::new(vec![
                ("alpha1", "background turbidity [1/m]"),
                ("h_opt", "best depth at X [m]"),
                ("Pi", "surface productivity at (X, h_opt) [g/m^2/d]"),
            ]);
            for alpha1 in range(0.0, 25.0, 26)? {
                let s = sc.with_extinction(sc.extinction.with_alpha1(alpha1));
                let h = optimal_depth_for_x(&s, a.x)?;
                t.push(vec![alpha1, h, s.surface_productivity(a.x, h)]);
            }
            out.table("Pi_vs_alpha1", &t)?;
        }
        SweepKind::EpsOfX => {
            let xs = range(0.0, 1000.0, 1001)?;
            let reference = ExtinctionModel::chlorella(sc.extinction.alpha1);
            for &s in &a.s_values {
                let alpha0 = fit_alpha0(&reference, s, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS)?;
                let m = ExtinctionModel::new(alpha0, reference.alpha1, s)?;
                let mut t = Table::new(vec![("X", "concentration [g/m^3]"), ("eps", "extinction [1/m]")]);
                for &x in &xs {
                    t.push(vec![x, m.extinction(x)]);
                }
                out.table(&format!("eps_of_X_s{}", num(s)), &t)?;
            }
        }
    }
    for path in &out.written {
        println!("{}", path.display());
    }
    Ok(())
}

fn optimize(sc: &Scenario, h: Option<f64>, x: Option<f64>, out: &mut Outputs) -> Result<()> {
    let doc = match (h, x) {
        (Some(h), None) => {
            let opt = optimal_x_for_h(sc, h, None)?;
            json!({
                "h": json_num(h),
                "X_star": json_num(opt.x),
                "Pi_star": json_num(opt.pi),
                "Y": json_num(sc.optical_depth(opt.x, h)),
                "mu_bar": json_num(sc.mean_growth(opt.x, h)),
                "stationarity_residual": json_num(opt.stationarity_residual),
            })
        }
        (None, Some(x)) => {
            let h = optimal_depth_for_x(sc, x)?;
            json!({
                "X": json_num(x),
                "h_star": json_num(h),
                "Y_opt": json_num(sc.optical_depth(x, h)),
                "Pi": json_num(sc.surface_productivity(x, h)),
            })
        }
        _ => bail!("give exactly one of --h, --x"),
    };
    emit(out, "optimize.json", &doc)
}

fn parse_floor(s: &str) -> Result<f64> {
    let floor = match s {
        "raceway" => DepthFloor::Raceway.depth(),
        "tubular" => DepthFloor::Tubular.depth(),
        "biofilm" => DepthFloor::Biofilm.depth(),
        other => other.parse().with_context(|| format!("depth floor `{other}` is neither a number nor a preset"))?,
    };
    if !(floor > 0.0) {
        bail!("depth floor must be positive (got {floor})");
    }
    Ok(floor)
}

fn run_alternate(sc: &Scenario, x0: f64, n_max: usize, h_min: Option<&str>, cap: f64, out: &mut Outputs) -> Result<()> {
    let opts = AlternateOptions {
        n_max,
        depth_floor: h_min.map(parse_floor).transpose()?,
        bracket: BracketPolicy { cap, ..BracketPolicy::default() },
    };
    let tr = alternate(sc, x0, &opts)?;
    let mut t = Table::new(vec![
        ("n", "iterate [-]"),
        ("X_n", "concentration [g/m^3]"),
        ("h_n", "depth [m]"),
        ("Y_n", "optical depth [-]"),
        ("Pi_n", "surface productivity [g/m^2/d]"),
        ("bottom_net_growth", "mu(I_bottom) - R [1/d]"),
    ]);
    for it in &tr.iterates {
        t.push(vec![it.n as f64, it.x, it.h, it.y, it.pi, it.bottom_net_growth]);
    }
    out.table("alternate", &t)?;
    let mut doc = json!({
        "stop_reason": tr.stop_reason,
        "converged": tr.converged,
        "monotone": tr.monotonicity_violation().is_none(),
    });
    if !tr.iterates.is_empty() {
        let s = tr.summary(sc)?;
        doc["iterations"] = json!(s.iterations);
        doc["Y_opt"] = json_num(s.y_opt);
        doc["final_Y"] = json_num(s.final_optical_depth);
        doc["final_Xh"] = json_num(s.final_surface_biomass);
        doc["Xh_limit"] = json_num(s.surface_biomass_limit);
        doc["final_Pi"] = json_num(s.final_pi);
        doc["Pi_limit"] = json_num(s.pi_limit);
        doc["Pi_gap"] = json_num(s.final_pi - s.pi_limit);
        doc["relative_Pi_gap"] = json_num(s.relative_pi_gap);
        doc["Pi_growth_exponent"] = json_num(s.pi_growth_exponent);
        doc["expected_growth_exponent"] = json_num(s.expected_growth_exponent);
        doc["scaled_Pi"] = json_num(s.scaled_pi);
        doc["diverging"] = json!(s.diverging);
    }
    if let Some(f) = tr.floor_optimum {
        doc["floor_optimum"] = json!({
            "h": json_num(opts.depth_floor.unwrap_or(f64::NAN)),
            "X": json_num(f.x),
            "Pi": json_num(f.pi),
        });
    }
    emit(out, "alternate_summary.json", &doc)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    sc: &Scenario,
    x0: f64,
    h: f64,
    t_end: f64,
    d_max: Option<f64>,
    x_star: Option<f64>,
    x_bar: Option<f64>,
    out: &mut Outputs,
) -> Result<()> {
    let p = &sc.growth;
    let d_max = d_max.unwrap_or(10.0 * p.mu_max);
    let x_star = match x_star {
        Some(x) => x,
        None => optimal_x_for_h(sc, h, None)?.x,
    };
    let cfg = match x_bar {
        Some(xb) => ControlConfig::new(x_star, d_max, xb, p.mu_max, p.respiration)?,
        None => ControlConfig::with_default_threshold(sc, x_star, d_max, h)?,
    };
    let tr = simulate_closed_loop(&cfg, sc, x0, h, &SimOptions::new(t_end))?;
    match out.format {
        Format::Csv => {
            out.raw("simulate.csv", |w| tr.write_csv(w, num))?;
        }
        Format::Json => {
            out.table("simulate", &trace_table(&tr))?;
        }
    }
    let last = tr.samples.last().expect("trace has the initial sample");
    let doc = json!({
        "X_star": json_num(cfg.x_star),
        "X_bar": json_num(cfg.x_bar),
        "D_max": json_num(cfg.d_max),
        "h": json_num(h),
        "X0": json_num(x0),
        "t_end": json_num(t_end),
        "final_X": json_num(last.x),
        "final_relative_error": json_num((last.x - cfg.x_star) / cfg.x_star),
        "convergence_time_d": tr.convergence_time(CONVERGENCE_BAND).map(json_num),
        "band": CONVERGENCE_BAND,
        "samples": tr.samples.len(),
        "clamped_samples": tr.warnings.len(),
        "threshold_recrossing": tr.threshold_recrossing().is_some(),
        "bounds_hold": tr.bound_violation(1e-9).is_none(),
    });
    emit(out, "simulate_summary.json", &doc)
}

fn trace_table(tr: &SimTrace) -> Table {
    let mut t = Table::new(vec![
        ("t_d", "time [d]"),
        ("X_g_per_m3", "concentration [g/m^3]"),
        ("D_per_d", "dilution [1/d]"),
        ("mu_bar_per_d", "mean growth [1/d]"),
        ("Phi", "net volumetric production [g/m^3/d]"),
        ("Pi", "surface productivity [g/m^2/d]"),
    ]);
    for s in &tr.samples {
        t.push(vec![s.t, s.x, s.d, s.mu_bar, s.phi, s.pi]);
    }
    t
}
