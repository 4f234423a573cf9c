//! Library side of the diagnostic subcommands. Each returns its data tables
//! and a report with criterion-tagged verdicts.

use rand::Rng;

use super::output::{Cell, Table};
use super::report::{Report, Verdict};
use crate::clip::bias_variance_grid;
use crate::diagnostics::{sandwich_fuzz, RmsPropParams};
use crate::error::{config, Result};
use crate::noise::{tail_index, NoiseSpec};
use crate::problems::{chain_gradient, chain_oracle, chain_value, lowerbound_oracle, prog, ChainInstance, LowerBoundInstance};
use crate::rng::{Seed, SimRng};

pub struct ProbeOutput {
    pub tables: Vec<Table>,
    pub report: Report,
}

/// Log-spaced checkpoints `round(10^{i/per_decade})` in `[start, n]`, with `n`
/// always last.
pub fn log_checkpoints(start: usize, n: usize, per_decade: u32) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0u32;
    loop {
        let c = 10f64.powf(f64::from(i) / f64::from(per_decade)).round() as usize;
        if c > n {
            break;
        }
        if c >= start && out.last() != Some(&c) {
            out.push(c);
        }
        i += 1;
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// Samples `n` draws of `spec` and reports the running second moment, a
/// histogram and the tail-index estimate. One-dimensional specs use the
/// coordinate itself; higher dimensions use the Euclidean norm.
pub fn noise_probe(spec: &NoiseSpec, n: usize, block: usize, bins: usize, seed: u64) -> Result<ProbeOutput> {
    spec.validate()?;
    if n < 2 * block {
        return config(format!("noise probe needs at least {} draws", 2 * block));
    }
    let mut rng = Seed::new(seed).rng();
    let mut buf = vec![0.0f64; spec.dimension];
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        spec.sample_into(&mut rng, &mut buf);
        values.push(if spec.dimension == 1 {
            buf[0]
        } else {
            buf.iter().map(|v| v * v).sum::<f64>().sqrt()
        });
    }

    let mut variance = Table::new("variance", &["n", "second_moment"]);
    let checkpoints = log_checkpoints(10, n, 10);
    let mut sum = 0.0;
    let mut next = 0;
    for (i, v) in values.iter().enumerate() {
        sum += v * v;
        if next < checkpoints.len() && i + 1 == checkpoints[next] {
            variance.push(vec![checkpoints[next].into(), (sum / (i + 1) as f64).into()]);
            next += 1;
        }
    }

    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    mags.truncate(mags.len() / block * block);
    let est = tail_index(&mags, block)?;

    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let q = sorted[((sorted.len() as f64 * 0.99) as usize).min(sorted.len() - 1)].max(f64::MIN_POSITIVE);
    let lo = if spec.dimension == 1 { -q } else { 0.0 };
    let width = (q - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    for v in &values {
        let b = ((v - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let mut hist = Table::new("histogram", &["bin_lo", "bin_hi", "count", "density"]);
    for (i, c) in counts.iter().enumerate() {
        let a = lo + i as f64 * width;
        hist.push(vec![a.into(), (a + width).into(), (*c).into(), (*c as f64 / (n as f64 * width)).into()]);
    }

    let mut report = Report::new(format!("noise probe {} a={}", spec.family.name(), spec.tail_index), seed);
    report.fact("draws", n);
    report.fact("tail index estimate", format!("{:.4} (block {}, {} samples)", est.alpha_hat, block, est.sample_count));
    if let (Some(first), Some(last)) = (variance.rows.first(), variance.rows.last()) {
        if let (Cell::Num(a), Cell::Num(b)) = (&first[1], &last[1]) {
            report.fact("second moment growth (last/first checkpoint)", b / a);
        }
    }
    report.fact("draws outside histogram range", outside);
    Ok(ProbeOutput {
        tables: vec![variance, hist],
        report,
    })
}

/// Bias–variance probes of global clipping over a threshold grid (criterion A5).
pub fn lemma_check(
    spec: &NoiseSpec,
    true_grad: &[f64],
    taus: &[f64],
    alpha: f64,
    n: usize,
    z: f64,
    seed: u64,
) -> Result<ProbeOutput> {
    let mut rng = Seed::new(seed).rng();
    let grid = bias_variance_grid(spec, true_grad, taus, alpha, n, &mut rng)?;
    let mut table = Table::new(
        "lemma",
        &[
            "tau",
            "second_moment",
            "second_moment_se",
            "second_moment_bound",
            "bias_norm",
            "bias_se",
            "bias_bound",
            "smooth_case",
            "clip_rate",
        ],
    );
    let mut report = Report::new("bias-variance lemma probes", seed);
    if let Some(first) = grid.first() {
        report.fact("E|g|^alpha (G^alpha)", first.g_moment.value);
        report.fact("E|g - grad|^alpha (sigma^alpha)", first.sigma_moment.value);
    }
    for r in &grid {
        let b = r.tightest();
        table.push(vec![
            r.tau.into(),
            r.second_moment.into(),
            r.second_moment_se.into(),
            b.second_moment.into(),
            r.bias_norm.into(),
            r.bias_se.into(),
            b.bias_norm.into(),
            r.smooth.is_some().into(),
            r.clip_rate.into(),
        ]);
        let sm_ok = r.second_moment <= b.second_moment + z * r.second_moment_se;
        let bias_ok = r.bias_norm <= b.bias_norm + z * r.bias_se;
        report.verdicts.push(
            Verdict::new(
                "A5",
                "lemma",
                &format!("second_moment_bound(tau={})", r.tau),
                sm_ok,
                r.second_moment,
                format!("<= {:.6} + {z} SE", b.second_moment),
            )
            .with_detail(format!("SE {:.3e}", r.second_moment_se)),
        );
        report.verdicts.push(
            Verdict::new(
                "A5",
                "lemma",
                &format!("bias_bound(tau={})", r.tau),
                bias_ok,
                r.bias_norm,
                format!("<= {:.6} + {z} SE", b.bias_norm),
            )
            .with_detail(format!("SE {:.3e}", r.bias_se)),
        );
    }
    for w in grid.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let se = (a.second_moment_se.powi(2) + b.second_moment_se.powi(2)).sqrt();
        report.verdicts.push(Verdict::new(
            "A5",
            "lemma",
            &format!("variance_up({}->{})", a.tau, b.tau),
            b.second_moment >= a.second_moment - z * se,
            b.second_moment - a.second_moment,
            format!(">= -{z} SE ({:.3e})", z * se),
        ));
        let se = (a.bias_se.powi(2) + b.bias_se.powi(2)).sqrt();
        report.verdicts.push(Verdict::new(
            "A5",
            "lemma",
            &format!("bias_down({}->{})", a.tau, b.tau),
            b.bias_norm <= a.bias_norm + z * se,
            b.bias_norm - a.bias_norm,
            format!("<= {z} SE ({:.3e})", z * se),
        ));
    }
    Ok(ProbeOutput {
        tables: vec![table],
        report,
    })
}

/// Monte-Carlo validation of the lower-bound oracle (criterion A7): the mean
/// is within 4 SE of `x − b_ν` and `E|g|^α ≤ 1` up to 3 SE.
pub fn lowerbound_check(epsilons: &[f64], alphas: &[f64], points: &[f64], n: usize, seed: u64) -> Result<ProbeOutput> {
    if n < 2 {
        return config("need at least 2 draws");
    }
    let mut table = Table::new(
        "lowerbound",
        &["epsilon", "alpha", "nu", "x", "mean", "mean_se", "gradient", "alpha_moment", "alpha_moment_se"],
    );
    let mut report = Report::new("lower-bound oracle validation", seed);
    let mut stream = 0u64;
    for &eps in epsilons {
        for &alpha in alphas {
            for nu in [0u8, 1] {
                let inst = LowerBoundInstance::new(eps, alpha, nu)?;
                report.fact(
                    format!("eps={eps} alpha={alpha} nu={nu}"),
                    format!("gamma {:.6}, p {:.6}, b {:.6}", inst.gamma(), inst.p(), inst.b()),
                );
                for &x in points {
                    let mut rng = Seed::fan_out(seed, stream).rng();
                    stream += 1;
                    let (mut s, mut s2, mut m, mut m2) = (0.0, 0.0, 0.0, 0.0);
                    for _ in 0..n {
                        let g = lowerbound_oracle(&inst, x, &mut rng)?;
                        s += g;
                        s2 += g * g;
                        let a = g.abs().powf(alpha);
                        m += a;
                        m2 += a * a;
                    }
                    let nf = n as f64;
                    let mean = s / nf;
                    let se = ((s2 / nf - mean * mean).max(0.0) / (nf - 1.0)).sqrt();
                    let mom = m / nf;
                    let mom_se = ((m2 / nf - mom * mom).max(0.0) / (nf - 1.0)).sqrt();
                    let grad = inst.gradient(x);
                    table.push(vec![
                        eps.into(),
                        alpha.into(),
                        u64::from(nu).into(),
                        x.into(),
                        mean.into(),
                        se.into(),
                        grad.into(),
                        mom.into(),
                        mom_se.into(),
                    ]);
                    let tag = format!("eps={eps},alpha={alpha},nu={nu},x={x}");
                    report.verdicts.push(Verdict::new(
                        "A7",
                        "lowerbound",
                        &format!("unbiased({tag})"),
                        (mean - grad).abs() <= 4.0 * se,
                        (mean - grad) / se,
                        "|mean - grad| <= 4 SE (observed in SE units)",
                    ));
                    report.verdicts.push(Verdict::new(
                        "A7",
                        "lowerbound",
                        &format!("alpha_moment({tag})"),
                        mom <= 1.0 + 3.0 * mom_se,
                        mom,
                        format!("<= 1 + 3 SE ({:.3e})", 3.0 * mom_se),
                    ));
                }
            }
        }
    }
    Ok(ProbeOutput {
        tables: vec![table],
        report,
    })
}

/// A random test point: either uniform in `[−2, 2]^d`, or a "partially
/// progressed" point whose leading coordinates are large.
fn chain_point(rng: &mut SimRng, d: usize) -> Vec<f64> {
    if rng.random::<bool>() {
        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
    } else {
        let j = rng.random_range(0..=d);
        (0..d)
            .map(|i| {
                if i < j {
                    rng.random_range(0.5..2.5)
                } else {
                    rng.random_range(-0.7..0.7)
                }
            })
            .collect()
    }
}

/// A point with `prog_¼(x) = j < d` for a random `j`, so the oracle's
/// Bernoulli coordinate exists.
fn unfinished_chain_point(rng: &mut SimRng, d: usize) -> Vec<f64> {
    let j = rng.random_range(0..d);
    (0..d)
        .map(|i| {
            if i < j {
                rng.random_range(0.3..2.5)
            } else {
                rng.random_range(-0.2..0.2)
            }
        })
        .collect()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Numerical property suite of the zero-chain instance (criterion A8).
pub fn chain_check(d: usize, points: usize, p: f64, oracle_draws: usize, seed: u64) -> Result<ProbeOutput> {
    let inst = ChainInstance::new(d, p)?;
    let mut rng = Seed::new(seed).rng();
    let mut report = Report::new(format!("chain instance d={d}"), seed);
    let mut table = Table::new("chain", &["property", "observed", "limit", "passed"]);
    let verdict = |table: &mut Table, name: &str, passed: bool, observed: f64, limit: f64, cond: String| {
        table.push(vec![name.into(), observed.into(), limit.into(), passed.into()]);
        Verdict::new("A8", "chain", name, passed, observed, cond)
    };

    let zero = vec![0.0; d];
    let f0 = chain_value(&inst, &zero);
    let mut best = f64::INFINITY;
    let mut max_inf = 0.0f64;
    let mut min_norm_unfinished = f64::INFINITY;
    let mut zero_chain_ok = true;
    let mut max_curv = 0.0f64;
    let h = 1e-5;
    for _ in 0..points {
        let x = chain_point(&mut rng, d);
        best = best.min(chain_value(&inst, &x));
        let g = chain_gradient(&inst, &x);
        max_inf = max_inf.max(norm_inf(&g));
        if prog(&x, 1.0) < d {
            let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            min_norm_unfinished = min_norm_unfinished.min(n);
        }
        if prog(&g, 0.0) > prog(&x, 0.5) + 1 {
            zero_chain_ok = false;
        }
        // Directional second derivative from central gradient differences.
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= vn);
        let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let (gp, gm) = (chain_gradient(&inst, &xp), chain_gradient(&inst, &xm));
        let curv: f64 = gp.iter().zip(&gm).zip(&v).map(|((a, b), c)| (a - b) * c).sum::<f64>() / (2.0 * h);
        max_curv = max_curv.max(curv.abs());
    }
    // Descent restarts probe the infimum from below the sampled points.
    for r in 0..20 {
        let mut x = if r == 0 { vec![0.0; d] } else { chain_point(&mut rng, d) };
        for _ in 0..2000 {
            let g = chain_gradient(&inst, &x);
            x.iter_mut().zip(&g).for_each(|(a, b)| *a -= b / 152.0);
        }
        best = best.min(chain_value(&inst, &x));
    }
    best = best.min(chain_value(&inst, &vec![3.0; d]));
    let gap = f0 - best;
    let limit = 12.0 * d as f64;
    let mut verdicts = vec![
        verdict(&mut table, "value_gap", gap <= limit, gap, limit, format!("f(0) - min <= 12d = {limit}")),
        verdict(&mut table, "grad_inf_norm", max_inf <= 23.0, max_inf, 23.0, "max |grad|_inf <= 23".into()),
        verdict(
            &mut table,
            "large_gradient",
            min_norm_unfinished >= 1.0,
            min_norm_unfinished,
            1.0,
            "min |grad| over prog_1(x) < d >= 1".into(),
        ),
        verdict(
            &mut table,
            "zero_chain",
            zero_chain_ok,
            if zero_chain_ok { 1.0 } else { 0.0 },
            1.0,
            "prog_0(grad) <= prog_1/2(x) + 1 everywhere".into(),
        ),
        verdict(
            &mut table,
            "smoothness",
            max_curv <= 152.0 * 1.01,
            max_curv,
            152.0,
            "directional curvature <= 152 (1% slack)".into(),
        ),
    ];

    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let x = chain_point(&mut rng, d);
        let g = chain_gradient(&inst, &x);
        let mut fd = vec![0.0; d];
        let hh = 1e-6;
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += hh;
            xm[i] -= hh;
            fd[i] = (chain_value(&inst, &xp) - chain_value(&inst, &xm)) / (2.0 * hh);
        }
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        max_rel = max_rel.max(diff / scale);
    }
    verdicts.push(verdict(
        &mut table,
        "finite_difference",
        max_rel <= 1e-4,
        max_rel,
        1e-4,
        "relative gradient error <= 1e-4 at 100 points".into(),
    ));

    let mut worst_z = 0.0f64;
    for _ in 0..5 {
        let x = unfinished_chain_point(&mut rng, d);
        let g = chain_gradient(&inst, &x);
        let mut s = vec![0.0; d];
        let mut s2 = vec![0.0; d];
        for _ in 0..oracle_draws {
            let o = chain_oracle(&inst, &x, &mut rng);
            // Deviations from the exact gradient are exactly zero on every
            // coordinate the oracle leaves alone. Scaling by |g_i| keeps
            // the squares clear of underflow deep in the chain.
            for i in 0..d {
                if g[i] == 0.0 {
                    continue;
                }
                let e = (o[i] - g[i]) / g[i].abs();
                s[i] += e;
                s2[i] += e * e;
            }
        }
        let nf = oracle_draws as f64;
        for i in 0..d {
            let mean = s[i] / nf;
            let se = ((s2[i] / nf - mean * mean).max(0.0) / (nf - 1.0)).sqrt();
            let z = if se > 0.0 {
                mean.abs() / se
            } else if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
        }
    }
    verdicts.push(verdict(
        &mut table,
        "oracle_unbiased",
        worst_z <= 4.0,
        worst_z,
        4.0,
        format!("max |mean - grad| / SE <= 4 over 5 points x {oracle_draws} draws"),
    ));
    report.fact("f(0)", f0);
    report.fact("best probed value", best);
    report.verdicts = verdicts;
    Ok(ProbeOutput {
        tables: vec![table],
        report,
    })
}

/// Fuzzes the RMSProp/clipped-SGD step-size band (criterion A9).
pub fn sandwich_probe(n: u64, params: RmsPropParams, seed: u64) -> Result<ProbeOutput> {
    let mut rng = Seed::new(seed).rng();
    let f = sandwich_fuzz(n, 100.0, 100.0, params, &mut rng)?;
    let mut table = Table::new(
        "sandwich",
        &["points", "violations", "min_ratio", "max_ratio", "argmin_v", "argmin_g"],
    );
    table.push(vec![
        f.points.into(),
        f.violations.into(),
        f.min_ratio.into(),
        f.max_ratio.into(),
        f.argmin.0.into(),
        f.argmin.1.into(),
    ]);
    let mut report = Report::new("RMSProp / clipped SGD step-size sandwich", seed);
    report.fact("min ratio h_adam/h_clip", f.min_ratio);
    report.fact("max ratio h_adam/h_clip", f.max_ratio);
    report.fact(
        "claimed lower constant 1/2",
        if f.min_ratio < 0.5 {
            "violated: observed ratios fall below 1/2 (provable band is [1/4, 1/2])"
        } else {
            "not violated on this sample"
        },
    );
    report.verdicts.push(
        Verdict::new(
            "A9",
            "sandwich",
            "band",
            f.violations == 0,
            f.violations as f64,
            "zero violations of 1/4 h_clip <= h_adam <= 2 h_clip",
        )
        .with_detail(format!("{} points, min ratio {:.6}, max ratio {:.6}", f.points, f.min_ratio, f.max_ratio)),
    );
    Ok(ProbeOutput {
        tables: vec![table],
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints() {
        assert_eq!(log_checkpoints(10, 100, 5), vec![10, 16, 25, 40, 63, 100]);
        assert_eq!(log_checkpoints(10, 50, 1), vec![10, 50]);
    }

    #[test]
    fn small_sandwich() {
        let out = sandwich_probe(1000, RmsPropParams::default(), 1).unwrap();
        assert!(out.report.all_passed());
    }

    #[test]
    fn small_lowerbound() {
        let out = lowerbound_check(&[0.125], &[2.0], &[0.3], 20_000, 4).unwrap();
        assert_eq!(out.tables[0].rows.len(), 2);
        assert_eq!(out.report.verdicts.len(), 4);
    }
}
