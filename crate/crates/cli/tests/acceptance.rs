//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use linvol::cocycle::{expansion_probe, find_positive_cycle, lyapunov_spectrum, LyapunovOptions};
use linvol::rauzy::{induct_step, rauzy_path, visiting_counts};
use linvol::sampler::LengthSampler;
use linvol::suspension::{stratum_of, suspension_exists, Flavor};
use linvol::weakmix::{obstruction_series_for, weak_mixing_report, ObstructionVector, ReturnWindow, WeakMixOptions};
use linvol::{GeneralizedPermutation, LinearInvolution, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{run_cli, Q22};

const Q_5_M1: &str = "A A / B C B C D E D E";
const Q_2_1_1: &str = "A B A B C / C D E F D E F";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn perm(text: &str) -> GeneralizedPermutation {
    GeneralizedPermutation::parse(text).unwrap()
}

/// Random irreducible permutations with `d <= 6` that carry lengths, each with exact admissible lengths.
fn random_cases(seed: u64, count: usize, bits: u64) -> Vec<(GeneralizedPermutation, Vec<Rational>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tables: HashMap<usize, Vec<GeneralizedPermutation>> = HashMap::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = rng.gen_range(2..=6);
        let all = tables.entry(d).or_insert_with(|| GeneralizedPermutation::enumerate(d));
        let p = all[rng.gen_range(0..all.len())].clone();
        if !p.is_irreducible() || !p.admits_lengths() || !p.is_dynamically_irreducible() {
            continue;
        }
        let lam = LengthSampler::new(&p).unwrap().exact_from_seed(seed, out.len() as u64, bits).unwrap();
        out.push((p, lam));
    }
    out
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cases = random_cases(1, 500, 256);
    let mut ok = 0;
    let mut failures = Vec::new();
    for (i, (p, lam)) in cases.iter().enumerate() {
        let t = LinearInvolution::from_aligned(p.clone(), lam.clone()).unwrap();
        match rauzy_path(&t, 25) {
            Ok((path, end)) if path.product.apply(end.lengths()) == *lam => ok += 1,
            Ok(_) => failures.push(format!("case {i} {p}: product mismatch")),
            Err(e) => failures.push(format!("case {i} {p}: {e}")),
        }
    }
    let el = start.elapsed();
    outcome(
        ok == cases.len() && within(el, 120),
        format!("{ok}/{} cases with B^25 lambda^25 = lambda, {:.1?} (limit 2 min) {failures:?}", cases.len(), el),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cases = random_cases(1, 500, 256);
    let mut ok = 0;
    let mut failures = Vec::new();
    'case: for (i, (p, lam)) in cases.iter().enumerate() {
        let mut t = LinearInvolution::from_aligned(p.clone(), lam.clone()).unwrap();
        for depth in 0..10 {
            let (_, next) = match induct_step(&t) {
                Ok(x) => x,
                Err(e) => {
                    failures.push(format!("case {i} depth {depth}: {e}"));
                    continue 'case;
                }
            };
            let fr = match t.first_return_map(next.total()) {
                Ok(fr) => fr,
                Err(e) => {
                    failures.push(format!("case {i} depth {depth}: {e}"));
                    continue 'case;
                }
            };
            let same_perm = fr.involution.permutation() == next.permutation();
            let same_lengths = fr.involution.length_vector().aligned(next.permutation()).ok().as_deref()
                == Some(next.lengths());
            if !same_perm || !same_lengths {
                failures.push(format!("case {i} {p} depth {depth}: induced map differs"));
                continue 'case;
            }
            t = next;
        }
        ok += 1;
    }
    let el = start.elapsed();
    outcome(
        ok == cases.len() && within(el, 300),
        format!("{ok}/{} cases agree to depth 10, {:.1?} (limit 5 min) {failures:?}", cases.len(), el),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cases = random_cases(3, 100, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = 0;
    let mut failures = Vec::new();
    for (i, (p, lam)) in cases.iter().enumerate() {
        let n = rng.gen_range(1..=8);
        let t = LinearInvolution::from_aligned(p.clone(), lam.clone()).unwrap();
        let (path, _) = rauzy_path(&t, n).unwrap();
        match visiting_counts(&t, n) {
            Ok(m) if m == path.visiting_matrix() => ok += 1,
            Ok(_) => failures.push(format!("case {i} {p} n={n}: matrices differ")),
            Err(e) => failures.push(format!("case {i} {p} n={n}: {e}")),
        }
    }
    let el = start.elapsed();
    outcome(
        ok == cases.len() && within(el, 120),
        format!("{ok}/{} transposed products equal orbit visit counts, {el:.1?} (limit 2 min) {failures:?}", cases.len()),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let (mut agree, mut total, mut excluded) = (0, 0, 0);
    let mut disagreements = Vec::new();
    for d in 1..=5 {
        for p in GeneralizedPermutation::enumerate(d) {
            if !p.admits_lengths() {
                excluded += 1;
                continue;
            }
            total += 1;
            if suspension_exists(&p) == p.is_irreducible() {
                agree += 1;
            } else if disagreements.len() < 5 {
                disagreements.push(p.to_string());
            }
        }
    }
    let el = start.elapsed();
    outcome(
        agree == total && within(el, 600),
        format!(
            "{agree}/{total} permutations with d <= 5 carrying lengths: suspension exists iff irreducible; \
             {excluded} without any balanced positive lengths excluded; {:.1?} (limit 10 min) {disagreements:?}",
            el
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cases = random_cases(5, 100, 256);
    let mut ok = 0;
    let mut failures = Vec::new();
    for (i, (p, lam)) in cases.iter().enumerate() {
        let s = stratum_of(p).unwrap();
        let sum: i64 = s.orders.iter().sum();
        let gauss_bonnet = match s.flavor {
            Flavor::Quadratic => {
                let cover = s.double_cover().unwrap();
                sum == 4 * s.genus - 4 && cover.orders.iter().sum::<i64>() == 2 * cover.genus - 2
            }
            Flavor::Abelian => sum == 2 * s.genus - 2,
        };
        if !gauss_bonnet {
            failures.push(format!("case {i} {p}: {s:?}"));
            continue;
        }
        let mut t = LinearInvolution::from_aligned(p.clone(), lam.clone()).unwrap();
        let mut invariant = true;
        for _ in 0..20 {
            let (_, next) = induct_step(&t).unwrap();
            if stratum_of(next.permutation()).unwrap() != s {
                invariant = false;
                failures.push(format!("case {i} {p}: stratum changes at {}", next.permutation()));
                break;
            }
            t = next;
        }
        ok += usize::from(invariant);
    }
    let el = start.elapsed();
    outcome(
        ok == cases.len() && within(el, 180),
        format!(
            "{ok}/{} instances satisfy Gauss-Bonnet on the surface and its cover and keep the stratum for 20 steps, \
             {el:.1?} (limit 3 min) {failures:?}",
            cases.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let opts = LyapunovOptions::default();
    let mut all = true;
    let mut lines = Vec::new();
    for text in [Q22, Q_5_M1, Q_2_1_1] {
        let p = perm(text);
        let s = stratum_of(&p).unwrap();
        let odd = s.orders.iter().filter(|o| *o % 2 != 0).count() as i64;
        let expected_zero = p.d() as i64 - (2 * s.genus + odd - 2);
        let r = lyapunov_spectrum::<f64>(&p, &opts).unwrap();
        let (th, sd) = (&r.exponents, &r.stderr);
        let k = th.len();
        let zero_thr = |i: usize| (3.0 * sd[i]).max(opts.zero_tolerance * th[0].abs());
        let nonzero: Vec<bool> = (0..k).map(|i| th[i].abs() > zero_thr(i)).collect();
        let a = th[1] > 3.0 * sd[1] && th[0] - th[1] > 3.0 * (sd[0] + sd[1]) && nonzero[1];
        let b = (0..k)
            .filter(|&i| nonzero[i] && nonzero[k - 1 - i])
            .all(|i| (th[i] + th[k - 1 - i]).abs() <= 3.0 * r.paired_sum_stderr[i]);
        let c = r.near_zero_count as i64 == expected_zero;
        all &= a && b && c;
        if !a && c && !nonzero[1] {
            lines.push(format!(
                "{text}: the nonzero block has rank {}, so a second positive exponent would contradict (c)",
                2 * s.genus + odd - 2
            ));
        }
        lines.push(format!(
            "{text} [{s:?}]: theta = {th:.5?}, stderr = {}; (a) {} (b) {} (c) {} near-zero {} expected {}",
            sd.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(" "),
            verdict(a),
            verdict(b),
            verdict(c),
            r.near_zero_count,
            expected_zero
        ));
    }
    outcome(all, lines.join("\n    "))
}

fn verdict(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let steps = 500;
    let cases = random_cases(7, 20, 256 + 2 * steps as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for (i, (p, lam)) in cases.iter().enumerate() {
        for _ in 0..50 {
            total += 1;
            let v: Vec<Rational> = (0..p.d()).map(|_| Rational::from_integer(rng.gen_range(-1000i64..=1000).into())).collect();
            let series =
                obstruction_series_for(p, lam, &ObstructionVector::Exact(v), steps, &ReturnWindow::default()).unwrap();
            let exact = series.exact.as_ref().unwrap();
            if exact.numerators.len() == steps + 1 && exact.numerators.iter().all(|k| k.bits() == 0) {
                ok += 1;
            } else if failures.len() < 5 {
                failures.push(format!("case {i} {p}"));
            }
        }
    }
    let el = start.elapsed();
    outcome(
        ok == total && within(el, 120),
        format!("{ok}/{total} integer vectors with d_n = 0 exactly for n <= {steps}, {el:.1?} (limit 2 min) {failures:?}"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let p = perm(Q22);
    let opts = WeakMixOptions::default();
    let r = weak_mixing_report(&p, &opts).unwrap();
    let samples_with_returns = r.samples.iter().filter(|s| s.returns > 0).count();
    let mut detail = format!(
        "{}/{} nontrivial (sample, t) pairs non-decaying = {:.3} (need >= 0.90); decaying {}, inconclusive {}; \
         {samples_with_returns}/{} samples revisit the window",
        r.non_decaying,
        r.nontrivial_pairs,
        r.fraction_non_decaying,
        r.decaying,
        r.inconclusive,
        r.samples.len()
    );
    for dump in &r.dumps {
        let head: Vec<String> = dump.series.distances.iter().take(8).map(|x| format!("{x:.2e}")).collect();
        detail.push_str(&format!(
            "\n    decaying candidate: sample {} t = {} returns {} d_n = {} ...",
            dump.sample,
            dump.t,
            dump.series.returns.len(),
            head.join(" ")
        ));
    }
    if !r.dumps.is_empty() {
        let path = std::env::temp_dir().join("weakmix-acceptance-decaying.json");
        std::fs::write(&path, serde_json::to_string_pretty(&r.dumps).unwrap()).unwrap();
        detail.push_str(&format!("\n    full exact series written to {}", path.display()));
    }
    let el = start.elapsed();
    detail.push_str(&format!("; {el:.1?} (limit 30 min)"));
    outcome(r.fraction_non_decaying >= 0.9 && within(el, 1800), detail)
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut perms: Vec<GeneralizedPermutation> = [Q22, Q_5_M1, Q_2_1_1].iter().map(|t| perm(t)).collect();
    perms.extend(random_cases(9, 7, 64).into_iter().map(|c| c.0).filter(|p| p.is_genuine() || p.is_iet_like()));
    let mut ok = 0;
    let mut lines = Vec::new();
    for p in &perms {
        match find_positive_cycle(p, 0, 8, 1_000_000) {
            Ok(dom) => {
                let probe = expansion_probe(&dom.cycle.product, 10_000, 0);
                let good = dom.cycle.product.is_positive() && dom.diameter.is_finite() && probe.expanded == 0;
                ok += usize::from(good);
                lines.push(format!(
                    "{p}: length {}, diameter {:.3e}, max ratio {:.3e}, expanded {}",
                    dom.cycle.len(),
                    dom.diameter,
                    probe.max_ratio,
                    probe.expanded
                ));
            }
            Err(e) => lines.push(format!("{p}: {e}")),
        }
    }
    let el = start.elapsed();
    outcome(
        ok == perms.len() && within(el, 60),
        format!("{ok}/{} cycles positive with finite diameter and no expansion on 10^4 pairs, {:.1?} (limit 1 min)\n    {}", perms.len(), el, lines.join("\n    ")),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("experiment.json");
    std::fs::write(
        &cfg,
        r#"{
  "permutation": "A B A C D C / D E B E",
  "seed": 17,
  "induct": {"steps": 30},
  "lyapunov": {"steps": 2000, "batches": 8, "warmup": 100},
  "cycle": {"pairs": 500},
  "veech": {"t": "1/3", "steps": 300},
  "correlate": {"options": {"orbit_len": 5000, "max_lag": 32}},
  "scan": {"samples": 4, "tgrid": "q6", "steps": 300}
}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let commands =
        ["validate", "classes", "induct", "suspend", "stratum", "cover", "lyapunov", "cycle", "veech", "correlate", "scan"];
    let mut same = 0;
    let mut differing = Vec::new();
    for cmd in commands {
        let a = run_cli(&["--config", c, cmd]);
        let b = run_cli(&["--config", c, "--jobs", "1", cmd]);
        let c2 = run_cli(&["--config", c, "--jobs", "3", cmd]);
        if a.0 == 0 && a == b && a == c2 {
            same += 1;
        } else {
            differing.push(format!("{cmd} (exit {} {} {}) {}", a.0, b.0, c2.0, a.2));
        }
    }
    outcome(
        same == commands.len(),
        format!("{same}/{} subcommands produce byte-identical reports across three runs and thread counts {differing:?}", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 path product reconstructs lengths", criterion_1),
        ("2 induction step equals first return map", criterion_2),
        ("3 transposed product equals visiting matrix", criterion_3),
        ("4 suspension exists iff irreducible", criterion_4),
        ("5 stratum bookkeeping and invariance", criterion_5),
        ("6 Lyapunov spectrum shape", criterion_6),
        ("7 integer vectors have zero obstruction", criterion_7),
        ("8 weak mixing scan on the Q(2,2) permutation", criterion_8),
        ("9 positive cycles contract", criterion_9),
        ("10 reports reproduce from config and seed", criterion_10),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        let number = name.split(' ').next().unwrap();
        if !only.is_empty() && !only.iter().any(|o| o == number) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let el = start.elapsed();
        match result {
            Ok(o) => {
                failed += usize::from(!o.pass);
                println!("{} criterion {name} [{:.1?}]\n    {}", if o.pass { "PASS" } else { "FAIL" }, el, o.detail);
            }
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {name} [{:.1?}]\n    panicked: {msg}", el);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
