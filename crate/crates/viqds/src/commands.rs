//! The experiments behind each subcommand.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde_json::{json, Value};
use viqds_core::adversaries::{
    is_classical_specious, type2_acceptance, witness_lists, zk_report, Instrument, Povm,
};
use viqds_core::concat::{ConcatProtocol, DEFAULT_DIM_CAP};
use viqds_core::random::seeded;
use viqds_core::soundness::{solve, SolveReport};
use viqds_core::vis::{VisProtocol, Witness};
use viqds_core::FieldElement;

use crate::error::{AppError, AppResult};
use crate::format::{read_json, GameFile, InstrumentFile};
use crate::report::Report;
use crate::row;
use crate::scenario::Scenario;

pub const EXACT_TOL: f64 = 1e-10;
pub const SDP_TOL: f64 = 1e-5;
pub const GAP_TOL: f64 = 1e-6;
pub const ZK_TOL: f64 = 1e-9;

/// Witness counts for the sampled exact checks at `p ≥ 5`.
const SAMPLED_TRUE: usize = 200;
const SAMPLED_PAIRS: usize = 1000;

/// Smallest and largest single-component acceptance over honest and wrong
/// witness pairs.
fn extremes(proto: &VisProtocol, seed: u64) -> AppResult<(f64, f64)> {
    let p = proto.p();
    let mut completeness: f64 = 1.0;
    let mut worst: f64 = 0.0;
    if p <= 3 {
        let all: Vec<Witness> = Witness::all(p)?.collect();
        for t in &all {
            for w in &all {
                let v = proto.exact_acceptance(t, w)?;
                if t == w {
                    completeness = completeness.min(v);
                } else {
                    worst = worst.max(v);
                }
            }
        }
        return Ok((completeness, worst));
    }
    let mut rng = seeded(seed);
    for _ in 0..SAMPLED_TRUE {
        let t = Witness::random(&mut rng, p)?;
        completeness = completeness.min(proto.exact_acceptance(&t, &t)?);
        // Same eigenbases with shifted labels, the closest wrong witnesses.
        for c in FieldElement::all(p)?.skip(1) {
            worst = worst.max(proto.exact_acceptance(&t, &t.shifted(c))?);
        }
    }
    let mut pairs = 0;
    while pairs < SAMPLED_PAIRS {
        let t = Witness::random(&mut rng, p)?;
        let w = Witness::random(&mut rng, p)?;
        if t != w {
            worst = worst.max(proto.exact_acceptance(&t, &w)?);
            pairs += 1;
        }
    }
    Ok((completeness, worst))
}

pub fn exact(p: u32, l: usize, seed: u64) -> AppResult<Report> {
    let proto = VisProtocol::new(p)?;
    let mut report = Report::new("exact", json!({"p": p, "l": l, "seed": seed}));
    let (c1, s1) = extremes(&proto, seed)?;
    let li = l as i32;
    let bound = (p as f64).powi(-li);
    let completeness = c1.powi(li);
    report.push(row! {
        "name" => "completeness", "value" => completeness, "bound" => 1.0,
        "pass" => (completeness - 1.0).abs() <= EXACT_TOL,
    });
    // Components are independent, so the worst wrong list is the product of
    // per-component worst cases.
    let type1 = s1.powi(li);
    report.push(row! {
        "name" => "soundness", "value" => type1, "bound" => bound,
        "pass" => type1 <= bound + EXACT_TOL,
    });
    let single = type2_acceptance(&Povm::constant(p, FieldElement::zero(p)?)?);
    let type2 = single.powi(li);
    report.push(row! {
        "name" => "soundness_type2", "value" => type2, "bound" => bound,
        "pass" => (type2 - bound).abs() <= EXACT_TOL,
    });
    Ok(report)
}

fn solve_row(report: &mut Report, label: &str, solved: &SolveReport, target: Option<f64>) {
    let mut pass = solved.gap < GAP_TOL && solved.certified;
    if let Some(t) = target {
        pass &= (solved.primal - t).abs() <= SDP_TOL;
    }
    report.push(row! {
        "game" => label, "primal" => solved.primal, "dual" => solved.dual, "gap" => solved.gap,
        "slack" => solved.slack, "iterations" => solved.iterations, "converged" => solved.converged,
        "target" => target, "pass" => pass,
    });
}

/// Type-2 optimum of the tensored game over `components` (one modulus each).
pub fn soundness(components: &[u32]) -> AppResult<Report> {
    let protos = components.iter().map(|&p| VisProtocol::new(p)).collect::<Result<Vec<_>, _>>()?;
    let concat = ConcatProtocol::new(protos)?;
    let solved = concat.type2_bound(DEFAULT_DIM_CAP)?;
    let target: f64 = components.iter().map(|&p| 1.0 / p as f64).product();
    let label = components.iter().map(|p| format!("V[{p}]")).collect::<Vec<_>>().join("⊗");
    let mut report = Report::new("soundness", json!({"components": components}));
    solve_row(&mut report, &label, &solved, Some(target));
    Ok(report)
}

pub fn soundness_file(path: &Path) -> AppResult<Report> {
    let file: GameFile = read_json(path)?;
    let op = match file.decode()? {
        crate::format::Game::Dense(g) => g.operator()?,
        crate::format::Game::Records(g) => g.operator()?,
    };
    let (solved, _) = solve(&op)?;
    let mut report = Report::new("soundness", json!({"game": path.display().to_string()}));
    solve_row(&mut report, "file", &solved, None);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstrumentSpec {
    Honest,
    Identity,
    Computational,
    Eigenbasis(u32),
    Random(usize),
    File(PathBuf),
}

impl std::str::FromStr for InstrumentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<usize, String> {
            a.ok_or_else(|| format!("{head} needs a count"))?
                .parse()
                .map_err(|_| format!("bad count in {s:?}"))
        };
        match head {
            "honest" => Ok(Self::Honest),
            "identity" => Ok(Self::Identity),
            "computational" => Ok(Self::Computational),
            "eigenbasis" => Ok(Self::Eigenbasis(arg.map_or(Ok(0), |_| number(arg))? as u32)),
            "random" => Ok(Self::Random(number(arg)?)),
            "file" => Ok(Self::File(PathBuf::from(arg.ok_or("file needs a path")?))),
            _ => Err(format!("unknown instrument {s:?}")),
        }
    }
}

pub fn default_instruments() -> Vec<InstrumentSpec> {
    vec![InstrumentSpec::Honest, InstrumentSpec::Computational, InstrumentSpec::Eigenbasis(0)]
}

fn expand(p: u32, specs: &[InstrumentSpec], seed: u64) -> AppResult<Vec<(String, Instrument)>> {
    let proto = VisProtocol::new(p)?;
    let mut rng = seeded(seed);
    let mut out = Vec::new();
    for spec in specs {
        match spec {
            InstrumentSpec::Honest => out.push(("honest".into(), Instrument::honest(p)?)),
            InstrumentSpec::Identity => out.push(("identity".into(), Instrument::identity(p)?)),
            InstrumentSpec::Computational => {
                out.push(("computational".into(), Instrument::computational_measure(p)?))
            }
            InstrumentSpec::Eigenbasis(t) => {
                let t = FieldElement::new(*t as u64, p)?;
                out.push((format!("eigenbasis:{}", t.value()), Instrument::eigenbasis_measure(&proto, t)?));
            }
            InstrumentSpec::Random(n) => {
                for i in 0..*n {
                    let kraus = rng.random_range(1..=4);
                    let labels = rng.random_range(1..=3);
                    out.push((format!("random:{i}"), Instrument::random_specious(&mut rng, p, kraus, labels)?));
                }
            }
            InstrumentSpec::File(path) => {
                let inst = read_json::<InstrumentFile>(path)?.decode()?;
                if inst.p() != p || inst.components() != 1 {
                    return Err(AppError::Format(format!(
                        "{}: expected a single-component instrument at p = {p}",
                        path.display()
                    )));
                }
                out.push((format!("file:{}", path.display()), inst));
            }
        }
    }
    Ok(out)
}

/// Transcript witness-independence for each instrument applied to every
/// component of the `l`-fold protocol.
pub fn zk(p: u32, l: usize, specs: &[InstrumentSpec], seed: u64) -> AppResult<Report> {
    let proto = VisProtocol::new(p)?;
    let lists = witness_lists(p, l)?;
    let names: Vec<String> = specs.iter().map(spec_name).collect();
    let mut report = Report::new("zk", json!({"p": p, "l": l, "seed": seed, "instruments": names}));
    for (name, single) in expand(p, specs, seed)? {
        let specious = is_classical_specious(&single)?;
        let mut joint = single.clone();
        for _ in 1..l {
            joint = joint.tensor(&single)?;
        }
        let z = zk_report(&proto, &joint, &lists)?;
        let independent = z.max_tv < ZK_TOL && z.closed_form_gap < ZK_TOL;
        report.push(row! {
            "instrument" => name, "labels" => single.labels(),
            "specious" => specious.is_specious, "specious_residual" => specious.residual,
            "max_tv" => z.max_tv, "closed_form_gap" => z.closed_form_gap,
            // Non-specious controls are reported, never failed.
            "pass" => !specious.is_specious || independent,
        });
    }
    Ok(report)
}

fn spec_name(s: &InstrumentSpec) -> String {
    match s {
        InstrumentSpec::Honest => "honest".into(),
        InstrumentSpec::Identity => "identity".into(),
        InstrumentSpec::Computational => "computational".into(),
        InstrumentSpec::Eigenbasis(t) => format!("eigenbasis:{t}"),
        InstrumentSpec::Random(n) => format!("random:{n}"),
        InstrumentSpec::File(p) => format!("file:{}", p.display()),
    }
}

pub struct ViqdsRun {
    pub report: Report,
    pub log: Vec<Value>,
}

pub fn viqds(scenario: &Scenario, reps: usize) -> AppResult<ViqdsRun> {
    let out = scenario.run(reps)?;
    let config = serde_json::to_value(scenario).expect("serializable");
    let mut report = Report::new("viqds", config);
    for row in out.rows {
        report.push(row);
    }
    report.pass &= out.pass;
    Ok(ViqdsRun { report, log: out.log })
}

/// Built-in scenarios exercised by `suite`.
pub fn suite_scenarios(seed: u64, reps: usize) -> Vec<Scenario> {
    let honest = Scenario::honest(2, seed, reps);
    let forging = |kind: &str, parameters: Value| {
        let mut s = Scenario::honest(2, seed, reps.min(2000));
        s.adversary.kind = kind.into();
        s.adversary.parameters = parameters;
        s
    };
    let mut bitwise = Scenario::honest(2, seed, 100);
    bitwise.messages.clear();
    bitwise.bits = Some("10110010".into());
    vec![
        honest,
        forging("respond_constant", json!({"value": 0})),
        forging("povm", json!({"seed": seed, "with_abort": false})),
        forging("povm", json!({"seed": seed, "with_abort": true})),
        forging("relay_own_copy", Value::Null),
        forging("forward_challenge", Value::Null),
        bitwise,
    ]
}

/// Every experiment at its default size, in a fixed order.
pub fn suite(seed: u64, reps: usize) -> AppResult<Report> {
    let mut report = Report::new("suite", json!({"seed": seed, "reps": reps}));
    for p in [2, 3, 5] {
        report.extend(exact(p, 1, seed)?);
    }
    for l in 2..=4 {
        report.extend(exact(2, l, seed)?);
    }
    for comps in [&[2][..], &[3], &[5], &[2, 2], &[2, 3]] {
        report.extend(soundness(comps)?);
    }
    let mut specs = default_instruments();
    specs.push(InstrumentSpec::Random(20));
    report.extend(zk(2, 1, &specs, seed)?);
    for s in suite_scenarios(seed, reps) {
        report.extend(viqds(&s, reps)?.report);
    }
    Ok(report)
}
