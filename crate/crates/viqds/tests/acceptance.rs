//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use viqds_core::adversaries::{
    is_classical_specious, type2_acceptance, type2_acceptance_enumerated, witness_lists, zk_report,
    Instrument, Povm,
};
use viqds_core::concat::{
    acceptance_table, concat_exact, concat_type2_bound, index_lists, worst_wrong_witness, worst_wrong_witness_exhaustive,
    ConcatProtocol,
};
use viqds_core::random::seeded;
use viqds_core::soundness::{build_game_from_vis, solve, CqGame, GameDims, GameSpec};
use viqds_core::viqds::{forge_attack, keygen, keygen_bitwise, bitwise_sign, sign_session, ForgeStrategy, ForgeryScenario};
use viqds_core::vis::{VisProtocol, Witness};
use viqds_core::FieldElement;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("{what} took {t:?}, limit {limit:?}"))
}

fn completeness() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in [2u32, 3] {
        let proto = VisProtocol::new(p).map_err(|e| e.to_string())?;
        for w in Witness::all(p).unwrap() {
            worst = worst.max((proto.exact_acceptance(&w, &w).unwrap() - 1.0).abs());
            count += 1;
        }
    }
    let proto = VisProtocol::new(5).unwrap();
    let mut rng = seeded(1);
    for _ in 0..200 {
        let w = Witness::random(&mut rng, 5).unwrap();
        worst = worst.max((proto.exact_acceptance(&w, &w).unwrap() - 1.0).abs());
        count += 1;
    }
    ensure(worst <= 1e-10, format!("max |1 - acceptance| = {worst:e}"))?;
    within(Duration::from_secs(10), start, "completeness")?;
    Ok(format!("{count} witnesses, max deviation {worst:.1e}"))
}

fn type1_soundness() -> Check {
    let start = Instant::now();
    let proto = VisProtocol::new(2).unwrap();
    let all: Vec<Witness> = Witness::all(2).unwrap().collect();
    let mut worst2: f64 = 0.0;
    let mut pairs = 0;
    for t in &all {
        for w in all.iter().filter(|w| *w != t) {
            worst2 = worst2.max(proto.exact_acceptance(t, w).unwrap());
            pairs += 1;
        }
    }
    ensure(pairs == 240, format!("{pairs} pairs at p=2"))?;
    ensure(worst2 <= 0.5 + 1e-10, format!("p=2 maximum {worst2}"))?;

    let proto = VisProtocol::new(3).unwrap();
    let mut rng = seeded(2);
    let mut worst3: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let t = Witness::random(&mut rng, 3).unwrap();
        let w = Witness::random(&mut rng, 3).unwrap();
        if t != w {
            worst3 = worst3.max(proto.exact_acceptance(&t, &w).unwrap());
            n += 1;
        }
    }
    // Structured: same bases with shifted labels, and each single-entry change.
    for t in Witness::all(3).unwrap() {
        let [a, b, c, d] = t.values().map(u64::from);
        let mut wrong = vec![];
        for k in 1..3u64 {
            wrong.push(t.shifted(FieldElement::new(k, 3).unwrap()));
            wrong.push(Witness::new(3, [a + k, b, c, d]).unwrap());
            wrong.push(Witness::new(3, [a, b + k, c, d]).unwrap());
            wrong.push(Witness::new(3, [a, b, c + k, d]).unwrap());
            wrong.push(Witness::new(3, [a, b, c, d + k]).unwrap());
        }
        for w in wrong {
            worst3 = worst3.max(proto.exact_acceptance(&t, &w).unwrap());
        }
    }
    ensure(worst3 <= 1.0 / 3.0 + 1e-10, format!("p=3 maximum {worst3}"))?;
    within(Duration::from_secs(60), start, "type-1 soundness")?;
    Ok(format!("max p=2 {worst2:.12}, max p=3 {worst3:.12}"))
}

fn type2_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    for p in [2u32, 3] {
        let proto = VisProtocol::new(p).unwrap();
        let mut rng = seeded(3 + p as u64);
        for _ in 0..100 {
            let povm = Povm::random(&mut rng, p, false).unwrap();
            let v = type2_acceptance_enumerated(&proto, &povm).unwrap();
            worst = worst.max((v - 1.0 / p as f64).abs());
        }
        for _ in 0..100 {
            let povm = Povm::random(&mut rng, p, true).unwrap();
            let v = type2_acceptance_enumerated(&proto, &povm).unwrap();
            let pf = p as f64;
            let closed = 1.0 / pf - povm.abort().trace().re / (pf * pf * pf);
            worst = worst.max((v - closed).abs()).max((type2_acceptance(&povm) - closed).abs());
        }
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("400 POVMs, max deviation {worst:.1e}"))
}

fn sdp_certification() -> Check {
    let mut out = vec![];
    for p in [2u32, 3, 5] {
        let start = Instant::now();
        let proto = VisProtocol::new(p).unwrap();
        let g = build_game_from_vis(&proto).unwrap().operator().map_err(|e| e.to_string())?;
        let (r, _) = solve(&g).map_err(|e| e.to_string())?;
        ensure((r.primal - 1.0 / p as f64).abs() < 1e-5, format!("p={p} primal {}", r.primal))?;
        ensure(r.gap < 1e-6 && r.certified, format!("p={p} gap {:e}, slack {:e}", r.gap, r.slack))?;
        within(Duration::from_secs(10), start, &format!("p={p} solve"))?;
        out.push(format!("p={p} primal {:.8} gap {:.1e}", r.primal, r.gap));
    }
    Ok(out.join("; "))
}

fn multiplicativity() -> Check {
    let mut out = vec![];
    for (ps, target) in [(vec![2u32, 2], 0.25), (vec![2, 3], 1.0 / 6.0)] {
        let protos = ps.iter().map(|&p| VisProtocol::new(p).unwrap()).collect();
        let r = ConcatProtocol::new(protos)
            .unwrap()
            .type2_bound(viqds_core::concat::DEFAULT_DIM_CAP)
            .map_err(|e| e.to_string())?;
        ensure((r.primal - target).abs() < 1e-5, format!("{ps:?}: {}", r.primal))?;
        out.push(format!("{ps:?} -> {:.8}", r.primal));
    }
    Ok(out.join("; "))
}

fn g_positivity() -> Check {
    let mut rng = seeded(6);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let g = if i % 2 == 0 {
            GameSpec::random(&mut rng, GameDims { r: 2, a: 2 + i % 3, b: 2 }).operator()
        } else {
            CqGame::random(&mut rng, 3, 3, 2 + i % 3).operator()
        }
        .map_err(|e| e.to_string())?;
        worst = worst.min(g.min_eigenvalue().unwrap());
    }
    ensure(worst > -1e-10, format!("min eigenvalue {worst:e}"))?;
    Ok(format!("100 games, min eigenvalue {worst:.1e}"))
}

fn zero_knowledge() -> Check {
    let proto = VisProtocol::new(2).unwrap();
    let lists = witness_lists(2, 1).unwrap();
    let mut rng = seeded(7);
    let mut instruments = vec![Instrument::honest(2).unwrap()];
    for i in 0..20 {
        instruments.push(Instrument::random_specious(&mut rng, 2, 1 + i % 4, 1 + i % 3).unwrap());
    }
    let (mut tv, mut gap): (f64, f64) = (0.0, 0.0);
    for inst in &instruments {
        let s = is_classical_specious(inst).unwrap();
        ensure(s.is_specious, format!("instrument not specious, residual {}", s.residual))?;
        let z = zk_report(&proto, inst, &lists).unwrap();
        tv = tv.max(z.max_tv);
        gap = gap.max(z.closed_form_gap);
    }
    ensure(tv < 1e-9 && gap < 1e-9, format!("max TV {tv:e}, closed-form gap {gap:e}"))?;
    let control = Instrument::eigenbasis_measure(&proto, FieldElement::zero(2).unwrap()).unwrap();
    let leak = zk_report(&proto, &control, &lists).unwrap().max_tv;
    let specious = is_classical_specious(&control).unwrap().is_specious;
    ensure(leak > 0.01 && !specious, format!("control leaks only {leak}"))?;
    Ok(format!("21 instruments, max TV {tv:.1e}, gap {gap:.1e}; control TV {leak:.3}"))
}

fn concatenation() -> Check {
    let proto = VisProtocol::new(2).unwrap();
    let table = acceptance_table(&proto).unwrap();
    let mut out = vec![];
    for l in 1..=4usize {
        let target = 0.5f64.powi(l as i32);
        let truths = if l <= 3 {
            index_lists(16, l)
        } else {
            (0..16).map(|t| vec![t; l]).collect()
        };
        let type1 = worst_wrong_witness_exhaustive(&table, &truths);
        ensure((type1 - target).abs() < 1e-10, format!("l={l} type 1 {type1}"))?;
        // Every true list, with the maximum over wrong lists taken per component.
        let factored = worst_wrong_witness(&table, &index_lists(16, l));
        ensure((factored - target).abs() < 1e-10, format!("l={l} factored type 1 {factored}"))?;

        let mut rng = seeded(80 + l as u64);
        let product: f64 = (0..l)
            .map(|_| type2_acceptance_enumerated(&proto, &Povm::random(&mut rng, 2, false).unwrap()).unwrap())
            .product();
        ensure((product - target).abs() < 1e-9, format!("l={l} type 2 product {product}"))?;

        let ws: Vec<Witness> = (0..l).map(|_| Witness::random(&mut rng, 2).unwrap()).collect();
        let c = concat_exact(2, &ws, &ws).unwrap();
        ensure((c - 1.0).abs() < 1e-10, format!("l={l} completeness {c}"))?;

        let mut line = format!("l={l} type1 {type1}");
        if l <= 2 {
            let r = concat_type2_bound(l, 2).map_err(|e| e.to_string())?;
            ensure((r.primal - target).abs() < 1e-5, format!("l={l} tensored SDP {}", r.primal))?;
            line += &format!(" sdp {:.8}", r.primal);
        }
        out.push(line);
    }
    Ok(out.join("; "))
}

fn signatures() -> Check {
    let proto = ConcatProtocol::homogeneous(2, 1).unwrap();
    let (keys, parts) = keygen(&proto, 2, 3, &mut seeded(9)).unwrap();
    let mut accepted = 0;
    for s in 0..10_000u64 {
        accepted += usize::from(sign_session(&proto, &keys, &parts[(s % 3) as usize], (s % 2) as usize, s).unwrap().accept);
    }
    ensure(accepted == 10_000, format!("{accepted}/10000 honest sessions accepted"))?;

    let mut notes = vec![];
    for p in [2u32, 3] {
        let mut rng = seeded(10 + p as u64);
        let strategies = vec![
            ForgeStrategy::RespondConstant(0),
            ForgeStrategy::Povm(Povm::random(&mut rng, p, false).unwrap()),
            ForgeStrategy::Povm(Povm::random(&mut rng, p, true).unwrap()),
            ForgeStrategy::RelayFromOwnCopy,
            ForgeStrategy::ForwardChallenge,
        ];
        let scenarios: Vec<ForgeryScenario> =
            strategies.into_iter().map(|s| ForgeryScenario::new(0, 1, s).unwrap()).collect();
        let proto = ConcatProtocol::homogeneous(p, 1).unwrap();
        let (keys, parts) = keygen(&proto, 2, 1, &mut rng).unwrap();
        let bound = 1.0 / p as f64;
        for sc in &scenarios {
            let r = forge_attack(&proto, sc, &keys, &parts[0], 500, 1).map_err(|e| e.to_string())?;
            ensure(r.exact <= bound + 1e-12, format!("p={p} {} exact {}", sc.strategy().name(), r.exact))?;
            if matches!(sc.strategy(), ForgeStrategy::RespondConstant(0)) {
                ensure((r.exact - bound).abs() < 1e-12, format!("p={p} respond-0 exact {}", r.exact))?;
            }
        }
        notes.push(format!("p={p}: {} strategies ≤ {bound:.4}", scenarios.len()));
    }

    let (keys, parts) = keygen_bitwise(&proto, 8, 1, &mut seeded(12)).unwrap();
    let bits = [true, true, false, true, false, false, true, false];
    let sig = bitwise_sign(&proto, &bits, &keys, &parts[0], 0).unwrap();
    ensure(sig.accept, "bitwise signature rejected".into())?;
    ensure(sig.resources.key_systems == 16, format!("key_systems={}", sig.resources.key_systems))?;
    Ok(format!("10000/10000 honest; {}; key_systems=16", notes.join("; ")))
}

fn reproducibility() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_viqds"))
            .args(["suite", "--seed", "4242"])
            .env_remove("VIQDS_SEED")
            .output()
            .map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    ensure(a.status.success(), format!("suite exited with {}", a.status))?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, "reports differ".into())?;
    Ok(format!("two suite reports of {} bytes are identical", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("completeness", completeness),
        ("type-1 soundness", type1_soundness),
        ("type-2 soundness, closed form", type2_closed_form),
        ("SDP certification", sdp_certification),
        ("multiplicativity", multiplicativity),
        ("G positivity", g_positivity),
        ("zero knowledge", zero_knowledge),
        ("concatenation", concatenation),
        ("signatures end to end", signatures),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
