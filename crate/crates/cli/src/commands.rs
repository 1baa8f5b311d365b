use std::fs;
use std::io::{self, Write};
use std::path::Path;

use externalization_core::equilibrium::{enumerate_pure_nash, EquilibriumReport};
use externalization_core::game::AssumptionReport;
use externalization_core::mc::{estimate_win_prob, raw_samples, simulate as run_sim, SimConfig};
use externalization_core::sweep::{run_sweep, SweepResult};
use externalization_core::verification::verify_characterization;
use externalization_core::{Action, ActionProfile, Model, MonotoneFunction};
use serde_json::{json, Value};

use crate::config::{self, Config, ConfigError};
use crate::num::g17;
use crate::{exit, Common, PointArgs, SimulateArgs, SweepArgs, VerifyArgs, SCHEMA};

pub(crate) struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Self {
            code: exit::INVALID,
            message: message.to_string(),
        }
    }

    fn io(what: &Path, e: impl ToString) -> Self {
        Self {
            code: exit::IO,
            message: format!("{}: {}", what.display(), e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = if e.is_io() { exit::IO } else { exit::INVALID };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<externalization_core::Error> for Failure {
    fn from(e: externalization_core::Error) -> Self {
        Failure::invalid(e)
    }
}

type Outcome = Result<i32, Failure>;

fn stdout_failure(e: io::Error) -> Failure {
    Failure {
        code: exit::IO,
        message: format!("writing report: {e}"),
    }
}

fn emit_json(out: &mut dyn Write, command: &str, body: Value) -> io::Result<()> {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
        doc.extend(body);
    }
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load_model(common: &Common, g: Option<f64>, phi: Option<f64>) -> Result<(Config, Model), Failure> {
    let cfg = config::load(&common.config)?;
    let mut params = cfg.params.clone();
    if let Some(g) = g {
        params.g = g;
    }
    if let Some(phi) = phi {
        params.phi = phi;
    }
    let model = params.validate()?;
    Ok((cfg, model))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "FAILS"
    }
}

fn write_assumptions(out: &mut dyn Write, r: &AssumptionReport) -> io::Result<()> {
    writeln!(out, "assumption 1: c > Z(l)                    {:5}  margin {}", yes_no(r.a1.holds), r.a1.margin)?;
    writeln!(
        out,
        "assumption 2: W(gbar) k < -1              {:5}  margin {}  (W(gbar) k = {})",
        yes_no(r.a2.holds),
        r.a2.margin,
        r.a2_value
    )?;
    writeln!(out, "assumption 3: 1 - W(gbar) > Z(gbar - l)   {:5}  margin {}", yes_no(r.a3.holds), r.a3.margin)?;
    writeln!(out, "k = sup Z'/W' on (l, gbar) = {}", r.k)?;
    if let Some(p) = r.power_condition {
        writeln!(out, "power-family condition (beta/gamma)(a - gbar)/gbar = {p}")?;
    }
    for w in &r.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

pub(crate) fn check(args: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (_, model) = load_model(args, None, None)?;
    let report = model.check_assumptions()?;
    if args.json {
        emit_json(out, "check", json!({ "all_hold": report.all_hold(), "assumptions": to_value(&report) }))
    } else {
        write_assumptions(out, &report)
    }
    .map_err(stdout_failure)?;
    if report.all_hold() {
        Ok(exit::OK)
    } else {
        let _ = writeln!(err, "assumption(s) {} fail", report.failed().join(", "));
        Ok(exit::ASSUMPTION_FAILED)
    }
}

fn fmt_profiles(ps: &[ActionProfile]) -> String {
    let parts: Vec<String> = ps.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn write_solve(out: &mut dyn Write, m: &Model, r: &EquilibriumReport) -> io::Result<()> {
    writeln!(out, "g = {}, phi = {}", m.g(), m.phi())?;
    writeln!(out, "intervention probability Phi = {}", m.intervention_prob())?;
    writeln!(out, "payoffs (gov, rebels):")?;
    writeln!(out, "             rebels a                         rebels p")?;
    for gov in [Action::Attack, Action::Peace] {
        let cell = |reb| r.payoffs[ActionProfile::new(gov, reb)];
        let (x, y) = (cell(Action::Attack), cell(Action::Peace));
        writeln!(
            out,
            "  gov {}   ({:>12.9}, {:>12.9})     ({:>12.9}, {:>12.9})",
            gov.letter(),
            x.pi,
            x.rho,
            y.pi,
            y.rho
        )?;
    }
    writeln!(out, "tolerance gap D = {}", r.d_value)?;
    writeln!(out, "phi_bar = {}", r.phi_bar)?;
    match r.g_hat {
        Some(g) => writeln!(out, "g_hat(phi) = {g}")?,
        None => writeln!(out, "g_hat(phi) = n/a (needs phi_bar < phi < 1)")?,
    }
    writeln!(out, "pure Nash equilibria: {}", fmt_profiles(&r.equilibria))?;
    match r.regime {
        Some(reg) => writeln!(out, "regime: {}", reg.label())?,
        None => writeln!(out, "regime: none")?,
    }
    if !r.ties.is_empty() {
        let ties: Vec<String> = r.ties.iter().map(|t| to_value(t).as_str().unwrap_or_default().to_string()).collect();
        writeln!(out, "ties: {}", ties.join(", "))?;
    }
    for w in &r.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

pub(crate) fn solve(args: &PointArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Outcome {
    let (_, model) = load_model(&args.common, args.g, args.phi)?;
    let report = enumerate_pure_nash(&model)?;
    if args.common.json {
        emit_json(
            out,
            "solve",
            json!({
                "g": model.g(),
                "phi": model.phi(),
                "intervention_prob": model.intervention_prob(),
                "report": to_value(&report),
            }),
        )
    } else {
        write_solve(out, &model, &report)
    }
    .map_err(stdout_failure)?;
    Ok(exit::OK)
}

fn require_sweep(cfg: &Config) -> Result<externalization_core::sweep::SweepSpec, Failure> {
    cfg.sweep
        .ok_or_else(|| Failure::invalid("config key \"sweep\": missing required field for this command"))
}

fn write_sweep_files(dir: &Path, r: &SweepResult) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::io(&path, e))?;
    let io_err = |e: csv::Error| Failure::io(&path, e);
    w.write_record(["g", "phi", "d", "eq_pp", "eq_aa", "regime"]).map_err(io_err)?;
    for row in &r.rows {
        w.write_record([
            g17(row.g),
            g17(row.phi),
            g17(row.d),
            row.eq_pp.to_string(),
            row.eq_aa.to_string(),
            row.regime.map_or("", |reg| reg.label()).to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;

    let path = dir.join("boundary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::io(&path, e))?;
    let io_err = |e: csv::Error| Failure::io(&path, e);
    w.write_record(["phi", "g_hat"]).map_err(io_err)?;
    for b in &r.boundary {
        w.write_record([g17(b.phi), g17(b.g_hat)]).map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;
    Ok(())
}

pub(crate) fn sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (cfg, _) = load_model(&args.common, None, None)?;
    let spec = require_sweep(&cfg)?;
    let result = run_sweep(&cfg.params, &spec)?;
    for n in &result.notices {
        let _ = writeln!(err, "notice: {n}");
    }
    write_sweep_files(&args.out, &result)?;
    let pp = result.rows.iter().filter(|r| r.eq_pp).count();
    let aa = result.rows.iter().filter(|r| r.eq_aa).count();
    if args.common.json {
        emit_json(
            out,
            "sweep",
            json!({
                "rows": result.rows.len(),
                "rows_with_pp": pp,
                "rows_with_aa": aa,
                "phi_bar": result.phi_bar,
                "boundary": to_value(&result.boundary),
                "boundary_strictly_decreasing": result.boundary_strictly_decreasing(),
                "assumptions_hold": result.assumptions_hold,
                "grid": to_value(&result.spec),
                "notices": result.notices,
            }),
        )
    } else {
        (|| {
            writeln!(out, "grid: {} g x {} phi = {} points", result.spec.g.steps, result.spec.phi.steps, result.rows.len())?;
            writeln!(out, "points with (p,p): {pp}; with (a,a): {aa}")?;
            writeln!(out, "phi_bar = {}", result.phi_bar)?;
            writeln!(
                out,
                "boundary samples: {} (strictly decreasing: {})",
                result.boundary.len(),
                result.boundary_strictly_decreasing()
            )?;
            if !result.assumptions_hold {
                writeln!(out, "warning: assumptions do not all hold; regimes are descriptive only")?;
            }
            writeln!(out, "wrote sweep.csv and boundary.csv")
        })()
    }
    .map_err(stdout_failure)?;
    Ok(exit::OK)
}

pub(crate) fn verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (cfg, _) = load_model(&args.common, None, None)?;
    let spec = require_sweep(&cfg)?;
    let report = verify_characterization(&cfg.params, &spec)?;
    for n in &report.notices {
        let _ = writeln!(err, "notice: {n}");
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        let path = dir.join("verify.json");
        let doc = json!({ "schema": SCHEMA, "command": "verify", "report": to_value(&report) });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    }
    if args.common.json {
        emit_json(out, "verify", json!({ "passed": report.passed(), "report": to_value(&report) }))
    } else {
        (|| {
            if let Some(msg) = &report.message {
                return writeln!(out, "{msg}");
            }
            writeln!(
                out,
                "{} grid points, {} within the g_hat band skipped for clause iii",
                report.points_checked, report.boundary_points
            )?;
            for c in &report.clauses {
                writeln!(
                    out,
                    "clause {:<3} {}  checked {}, failures {}",
                    c.clause.numeral(),
                    if c.passed() { "pass" } else { "FAIL" },
                    c.checked,
                    c.failures
                )?;
                for x in &c.counterexamples {
                    let g = x.g.map_or_else(|| "-".to_string(), |g| g.to_string());
                    writeln!(out, "    g = {g}, phi = {}: {}", x.phi, x.detail)?;
                }
            }
            Ok(())
        })()
    }
    .map_err(stdout_failure)?;
    Ok(if !report.applicable {
        exit::NOT_APPLICABLE
    } else if report.passed() {
        exit::OK
    } else {
        exit::CLAUSE_FAILED
    })
}

struct Row {
    quantity: &'static str,
    closed_form: f64,
    est: externalization_core::mc::SimEstimate,
}

fn write_dump(path: &Path, cfg: &SimConfig) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::io(path, e))?;
    let io_err = |e: csv::Error| Failure::io(path, e);
    w.write_record(["sample_index", "R", "intervened", "winner", "gov_payoff", "reb_payoff"])
        .map_err(io_err)?;
    for (i, s) in raw_samples(cfg).iter().enumerate() {
        w.write_record([
            i.to_string(),
            g17(s.r),
            s.intervened.to_string(),
            if s.gov_wins { "gov" } else { "reb" }.to_string(),
            g17(s.gov_payoff),
            g17(s.reb_payoff),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

pub(crate) fn simulate(args: &SimulateArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Outcome {
    let (cfg, model) = load_model(&args.point.common, args.point.g, args.point.phi)?;
    let sim = cfg.sim.clone();
    let n = args
        .n
        .or(sim.as_ref().and_then(|s| s.n))
        .ok_or_else(|| Failure::invalid("sample count missing: pass --n or set sim.n"))?;
    let seed = args
        .seed
        .or(sim.as_ref().and_then(|s| s.seed))
        .ok_or_else(|| Failure::invalid("seed missing: pass --seed or set sim.seed"))?;
    let profile = args
        .profile
        .or(sim.as_ref().and_then(|s| s.profile))
        .ok_or_else(|| Failure::invalid("profile missing: pass --profile or set sim.profile"))?;
    let sc = SimConfig::new(model.clone(), n, seed, profile)?;

    let summary = run_sim(&sc);
    let cell = model.payoff_table()[profile];
    let intervention = if profile.gov == Action::Attack {
        model.intervention_prob()
    } else {
        0.0
    };
    let rows = [
        Row {
            quantity: "gov_payoff",
            closed_form: cell.pi,
            est: summary.gov_payoff,
        },
        Row {
            quantity: "reb_payoff",
            closed_form: cell.rho,
            est: summary.reb_payoff,
        },
        Row {
            quantity: "gov_win",
            closed_form: model.gov_win_prob(profile),
            est: summary.gov_win,
        },
        Row {
            quantity: "intervention",
            closed_form: intervention,
            est: summary.intervention,
        },
        Row {
            quantity: "z_of_g",
            closed_form: model.z().eval(model.g()),
            est: estimate_win_prob(&sc, model.g()),
        },
    ];
    if let Some(path) = &args.dump {
        write_dump(path, &sc)?;
    }

    if args.point.common.json {
        let estimates: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "quantity": r.quantity,
                    "closed_form": r.closed_form,
                    "mean": r.est.mean,
                    "std_error": r.est.std_error,
                    "z_score": r.est.z_score(r.closed_form),
                })
            })
            .collect();
        emit_json(
            out,
            "simulate",
            json!({
                "profile": profile.code(),
                "n": n,
                "seed": seed,
                "g": model.g(),
                "phi": model.phi(),
                "interventions": summary.interventions,
                "estimates": estimates,
            }),
        )
    } else {
        (|| {
            writeln!(out, "profile {profile}, n = {n}, seed = {seed}, g = {}, phi = {}", model.g(), model.phi())?;
            writeln!(out, "interventions: {}", summary.interventions)?;
            writeln!(
                out,
                "{:<14} {:>23} {:>23} {:>23} {:>8}",
                "quantity", "closed form", "empirical", "std error", "z"
            )?;
            for r in &rows {
                let z = r
                    .est
                    .z_score(r.closed_form)
                    .map_or_else(|| "n/a".to_string(), |z| format!("{z:.3}"));
                writeln!(
                    out,
                    "{:<14} {:>23} {:>23} {:>23} {:>8}",
                    r.quantity,
                    g17(r.closed_form),
                    g17(r.est.mean),
                    g17(r.est.std_error),
                    z
                )?;
            }
            Ok(())
        })()
    }
    .map_err(stdout_failure)?;
    Ok(exit::OK)
}
