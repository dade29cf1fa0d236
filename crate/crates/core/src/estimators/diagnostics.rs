use crate::error::Result;
use crate::linalg::RealMatrix;
use crate::measures::RealMeasure;
use crate::walk::{run_products, WalkConfig};

/// Real eigendirections of a 2×2 matrix.
fn eigendirections(m: &RealMatrix) -> Vec<[f64; 2]> {
    let (a, b, c, d) = (*m.get(0, 0), *m.get(0, 1), *m.get(1, 0), *m.get(1, 1));
    let tr = a + d;
    let disc = tr * tr / 4.0 - (a * d - b * c);
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    [tr / 2.0 + s, tr / 2.0 - s]
        .iter()
        .filter_map(|&l| {
            let v = if b.abs() > 1e-12 || (a - l).abs() > 1e-12 { [b, l - a] } else { [l - d, c] };
            let n = v[0].hypot(v[1]);
            (n > 1e-12).then(|| [v[0] / n, v[1] / n])
        })
        .collect()
}

/// Heuristic irreducibility and contraction checks; each returned string is a
/// warning. Neither property can be decided from samples.
pub fn irreducibility_warnings(m: &RealMeasure, seed: u64) -> Result<Vec<String>> {
    let mut out = Vec::new();
    // contraction: γ(A_n) should shrink as n grows
    let short = run_products(&WalkConfig::new(m.clone(), 10, 64, seed).with_gamma())?;
    let long = run_products(&WalkConfig::new(m.clone(), 40, 64, seed).with_gamma())?;
    let median = |rs: &[crate::walk::TrialRecord<f64>]| {
        let mut g: Vec<f64> = rs.iter().filter_map(|r| r.gamma_n).collect();
        g.sort_unstable_by(f64::total_cmp);
        g[g.len() / 2]
    };
    let (g10, g40) = (median(&short), median(&long));
    if g40 >= g10 * 0.999 && g10 > 1e-12 {
        out.push(format!("median gamma(A_n) does not decrease ({g10:.3e} at n=10, {g40:.3e} at n=40)"));
    }
    // invariant lines: an eigendirection of one draw fixed by many others
    if m.dim() == 2 {
        let draws = m.sample(seed ^ 0x1B5D, 32)?;
        for dir in eigendirections(&draws[0]) {
            let fixed = draws.iter().all(|g| {
                let w = [g.get(0, 0) * dir[0] + g.get(0, 1) * dir[1], g.get(1, 0) * dir[0] + g.get(1, 1) * dir[1]];
                let n = w[0].hypot(w[1]);
                n > 0.0 && (w[0] * dir[1] - w[1] * dir[0]).abs() / n < 1e-9
            });
            if fixed {
                out.push(format!("direction ({:.6}, {:.6}) is invariant under all sampled factors", dir[0], dir[1]));
            }
        }
    }
    Ok(out)
}
