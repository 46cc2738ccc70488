//! Point estimators for walk traces.
//!
//! MH walks target the uniform law directly, so the plain sample mean is the
//! estimator. SRW walks are degree-biased; the importance-sampling ratio
//! estimator divides the mean of `h(v)/d_v` by the mean of `1/d_v`, which is
//! exactly the ratio-recovery map `g(x) = (1/x_0, x_1/x_0, ..)` applied to
//! the mean of the reweighted vectors. The Jacobian of that map carries the
//! long-run covariance onto the ratio scale.
//!
//! All accumulations use compensated summation so that million-step sums
//! keep ~1e-13 relative accuracy.

use nalgebra::DMatrix;

use crate::chain::FeatureChain;
use crate::error::{Error, Result};
use crate::numeric::Kbn;
use crate::walk::WalkTrace;

/// Componentwise mean over all steps of a chain.
pub fn sample_mean(chain: &FeatureChain) -> Result<Vec<f64>> {
    let m = chain.len();
    if m == 0 {
        return Err(Error::ChainTooShort("mean of an empty chain".into()));
    }
    let p = chain.dim();
    let mut acc = vec![Kbn::new(); p];
    for step in chain.iter_steps() {
        for (a, &x) in acc.iter_mut().zip(step) {
            a.add(x);
        }
    }
    Ok(acc.iter().map(|a| a.value() / m as f64).collect())
}

/// Importance-sampling ratio estimator over a plain-feature trace:
/// componentwise `sum(h_j / d) / sum(1 / d)`.
pub fn ratio_mean(trace: &WalkTrace) -> Result<Vec<f64>> {
    let m = trace.len();
    if m == 0 {
        return Err(Error::ChainTooShort("ratio estimate of an empty trace".into()));
    }
    let p = trace.dim();
    let degrees = trace.degrees();
    let mut numerators = vec![Kbn::new(); p];
    let mut denominator = Kbn::new();
    for (step, &d) in trace.values().iter_steps().zip(degrees) {
        debug_assert!(d >= 1);
        let w = 1.0 / d as f64;
        denominator.add(w);
        for (acc, &x) in numerators.iter_mut().zip(step) {
            acc.add(x * w);
        }
    }
    let den = denominator.value();
    if den <= 0.0 {
        return Err(Error::Singular("importance-weight sum is nonpositive".into()));
    }
    Ok(numerators.iter().map(|n| n.value() / den).collect())
}

/// The ratio-recovery map `g(x) = (1/x_0, x_1/x_0, ..., x_{p-1}/x_0)`
/// applied to a mean of reweighted vectors. On a finite graph `x_0` is the
/// mean reciprocal degree and is bounded below by `1/d_max > 0`.
pub fn ratio_map(weighted_mean: &[f64]) -> Result<Vec<f64>> {
    let pivot = *weighted_mean
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty mean vector".into()))?;
    if pivot <= 0.0 {
        return Err(Error::Singular(format!(
            "mean reciprocal degree {pivot} must be strictly positive"
        )));
    }
    let mut out = Vec::with_capacity(weighted_mean.len());
    out.push(1.0 / pivot);
    for &x in &weighted_mean[1..] {
        out.push(x / pivot);
    }
    Ok(out)
}

/// Jacobian of the ratio-recovery map at `weighted_mean`, with entry
/// `(i, j) = d g_j / d x_i`: the first row is
/// `(-1/a^2, -x_1/a^2, ..., -x_{p-1}/a^2)` and the lower diagonal is `1/a`,
/// where `a = x_0`.
pub fn ratio_map_jacobian(weighted_mean: &[f64]) -> Result<DMatrix<f64>> {
    let p = weighted_mean.len();
    let a = *weighted_mean
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty mean vector".into()))?;
    if a == 0.0 {
        return Err(Error::Singular("ratio map pivot is zero".into()));
    }
    let inv_a = 1.0 / a;
    let inv_a2 = inv_a * inv_a;
    let mut j = DMatrix::<f64>::zeros(p, p);
    j[(0, 0)] = -inv_a2;
    for col in 1..p {
        j[(0, col)] = -weighted_mean[col] * inv_a2;
        j[(col, col)] = inv_a;
    }
    Ok(j)
}

/// Covariance of a smooth transform: `J^T S J`. Symmetric and positive
/// semidefinite whenever `S` is.
pub fn transform_covariance(j: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !s.is_square() || !j.is_square() || s.nrows() != j.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "jacobian is {}x{}, covariance is {}x{}",
            j.nrows(),
            j.ncols(),
            s.nrows(),
            s.ncols()
        )));
    }
    let mut out = j.transpose() * s * j;
    // Exact symmetry despite floating-point products.
    for r in 0..out.nrows() {
        for c in 0..r {
            let avg = 0.5 * (out[(r, c)] + out[(c, r)]);
            out[(r, c)] = avg;
            out[(c, r)] = avg;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureEvaluator, FeatureSpec};
    use crate::graph::{generate_er, largest_connected_component, load_edge_list, NodeStatsTable};
    use crate::mcse::batch_means_covariance;
    use crate::oracle::exact_means;
    use crate::walk::{run_walk, FeatureMap, WalkKind, WalkTrace};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain(p: usize, rows: &[&[f64]]) -> FeatureChain {
        let mut c = FeatureChain::new(p);
        for r in rows {
            c.push(r);
        }
        c
    }

    #[test]
    fn sample_mean_examples() {
        let c = chain(2, &[&[2.0, 1.0], &[2.0, 1.0], &[2.0, 1.0]]);
        assert_eq!(sample_mean(&c).unwrap(), vec![2.0, 1.0]);

        let c = chain(2, &[&[1.0, 0.0], &[3.0, 1.0]]);
        assert_eq!(sample_mean(&c).unwrap(), vec![2.0, 0.5]);

        assert!(sample_mean(&FeatureChain::new(1)).is_err());
    }

    #[test]
    fn ratio_mean_on_regular_graph_equals_plain_mean() {
        let g = load_edge_list("0 1\n0 2\n1 2".as_bytes()).unwrap().0; // K3
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree,cc").unwrap();
        let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (trace, _) = run_walk(
            &g,
            WalkKind::Srw,
            0,
            5_000,
            &eval,
            FeatureMap::Plain,
            ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let plain = sample_mean(trace.values()).unwrap();
        let ratio = ratio_mean(&trace).unwrap();
        for (a, b) in plain.iter().zip(&ratio) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn ratio_mean_single_step() {
        // One sample at the P3 center: h = (2, 1), d = 2.
        let mut trace = WalkTrace::new(WalkKind::Srw, FeatureMap::Plain, 1, 2);
        trace.record(1, 2, &[2.0, 1.0], true);
        assert_eq!(ratio_mean(&trace).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn srw_ratio_corrects_degree_bias_on_p3() {
        let g = load_edge_list("0 1\n1 2".as_bytes()).unwrap().0;
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (trace, _) = run_walk(
            &g,
            WalkKind::Srw,
            0,
            1_000_000,
            &eval,
            FeatureMap::Plain,
            ChaCha8Rng::seed_from_u64(17),
        )
        .unwrap();
        let truth = exact_means(&g, &spec, None).unwrap()[0]; // 4/3
        let corrected = ratio_mean(&trace).unwrap()[0];
        assert!((corrected - truth).abs() < 0.01, "corrected {corrected} vs {truth}");

        // The uncorrected mean converges to the degree-biased value
        // sum(d_i^2) / (2 n_e) = 1.5 instead.
        let uncorrected = sample_mean(trace.values()).unwrap()[0];
        assert!((uncorrected - 1.5).abs() < 0.01, "uncorrected {uncorrected}");
    }

    #[test]
    fn mh_mean_converges_on_p3() {
        let g = load_edge_list("0 1\n1 2".as_bytes()).unwrap().0;
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (trace, _) = run_walk(
            &g,
            WalkKind::Mh,
            0,
            1_000_000,
            &eval,
            FeatureMap::Plain,
            ChaCha8Rng::seed_from_u64(23),
        )
        .unwrap();
        let est = sample_mean(trace.values()).unwrap()[0];
        assert!((est - 4.0 / 3.0).abs() < 0.01, "estimate {est}");
    }

    #[test]
    fn jacobian_matches_displayed_pattern() {
        let j = ratio_map_jacobian(&[1.0, 0.3, 0.7, 0.9]).unwrap();
        assert_eq!(j.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, -0.3, -0.7, -0.9]);
        for col in 1..4 {
            assert_eq!(j[(col, col)], 1.0);
            for row in 1..4 {
                if row != col {
                    assert_eq!(j[(row, col)], 0.0);
                }
            }
        }

        let j = ratio_map_jacobian(&[0.5, 0.25]).unwrap();
        assert_eq!(j[(0, 0)], -4.0);
        assert_eq!(j[(0, 1)], -1.0);
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(1, 1)], 2.0);

        let j = ratio_map_jacobian(&[0.5]).unwrap();
        assert_eq!(j[(0, 0)], -4.0);

        assert!(ratio_map_jacobian(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn transform_covariance_examples() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let id = DMatrix::identity(2, 2);
        assert_eq!(transform_covariance(&id, &s).unwrap(), s);

        let j = DMatrix::from_row_slice(1, 1, &[-4.0]);
        let s = DMatrix::from_row_slice(1, 1, &[2.0]);
        assert_eq!(transform_covariance(&j, &s).unwrap()[(0, 0)], 32.0);

        let j3 = DMatrix::identity(3, 3);
        assert!(transform_covariance(&j3, &s).is_err());
    }

    #[test]
    fn ratio_and_map_routes_agree() {
        let g = generate_er(120, 0.06, 2).unwrap();
        let (g, _) = largest_connected_component(&g);
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree,degind:6,cc").unwrap();
        let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        for seed in 0..5 {
            let rng = ChaCha8Rng::seed_from_u64(seed);
            let (plain, _) =
                run_walk(&g, WalkKind::Srw, 0, 20_000, &eval, FeatureMap::Plain, rng.clone())
                    .unwrap();
            let (weighted, _) =
                run_walk(&g, WalkKind::Srw, 0, 20_000, &eval, FeatureMap::Reweighted, rng).unwrap();
            assert_eq!(plain.nodes(), weighted.nodes());
            let via_ratio = ratio_mean(&plain).unwrap();
            let via_map = ratio_map(&sample_mean(weighted.values()).unwrap()).unwrap();
            for (a, b) in via_ratio.iter().zip(&via_map) {
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    /// Under the SRW stationary law the importance weights cancel exactly:
    /// summing over all nodes analytically recovers the uniform mean.
    #[test]
    fn stationary_ratio_identity_on_tiny_graphs() {
        for edges in ["0 1\n1 2", "0 1\n0 2\n1 2", "0 1\n0 2\n0 3", "0 1\n1 2\n2 3\n3 0"] {
            let g = load_edge_list(edges.as_bytes()).unwrap().0;
            let stats = NodeStatsTable::compute(&g);
            let spec = FeatureSpec::parse_list("degree,cc").unwrap();
            let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
            let two_ne = 2.0 * g.edge_count() as f64;
            let p = spec.dim();
            let mut num = vec![0.0; p];
            let mut den = 0.0;
            for v in 0..g.node_count() as u32 {
                let pi = g.degree(v) as f64 / two_ne; // SRW stationary mass
                let h = eval.eval_vec(v);
                let d = g.degree(v) as f64;
                den += pi / d;
                for (acc, &x) in num.iter_mut().zip(&h) {
                    *acc += pi * x / d;
                }
            }
            let truth = exact_means(&g, &spec, None).unwrap();
            for (j, t) in truth.iter().enumerate() {
                assert_relative_eq!(num[j] / den, *t, max_relative = 1e-12);
            }
        }
    }

    /// MH estimates land within 3 batch-means standard errors of the exact
    /// mean in at least 95 of 100 seeded replications.
    #[test]
    fn mh_consistency_with_estimated_errors() {
        let graphs = {
            let p3 = load_edge_list("0 1\n1 2".as_bytes()).unwrap().0;
            let er = generate_er(200, 0.05, 3).unwrap();
            let (er, _) = largest_connected_component(&er);
            vec![p3, er]
        };
        for g in graphs {
            let stats = NodeStatsTable::compute(&g);
            let spec = FeatureSpec::parse_list("degree").unwrap();
            let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
            let truth = exact_means(&g, &spec, None).unwrap()[0];
            let m = 20_000;
            let mut hits = 0;
            for seed in 0..100u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let start = crate::walk::random_start(&g, &mut rng);
                let (trace, _) =
                    run_walk(&g, WalkKind::Mh, start, m, &eval, FeatureMap::Plain, rng).unwrap();
                let est = sample_mean(trace.values()).unwrap()[0];
                let cov = batch_means_covariance(trace.values(), crate::mcse::BatchRule::Sqrt)
                    .unwrap();
                let se = (cov.sigma[(0, 0)] / m as f64).sqrt();
                if (est - truth).abs() <= 3.0 * se {
                    hits += 1;
                }
            }
            assert!(hits >= 95, "only {hits}/100 within 3 se (n = {})", g.node_count());
        }
    }

    proptest! {
        /// |J^T S J| = |J|^2 |S| for the delta-method sandwich.
        #[test]
        fn sandwich_determinant_identity(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = 4;
            let a =
                DMatrix::<f64>::from_fn(p, p, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let s = &a * a.transpose() + DMatrix::identity(p, p) * 0.1;
            let j =
                DMatrix::<f64>::from_fn(p, p, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            prop_assume!(j.determinant().abs() > 0.05);
            let t = transform_covariance(&j, &s).unwrap();
            let lhs = t.determinant();
            let rhs = j.determinant().powi(2) * s.determinant();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }

        /// Ratio estimates from random degree-weighted traces match the
        /// ratio-map route to 1e-12 relative.
        #[test]
        fn ratio_equivalence_on_synthetic_traces(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = 3;
            let m = 200;
            let mut plain = WalkTrace::new(WalkKind::Srw, FeatureMap::Plain, 0, p);
            let mut weighted = FeatureChain::new(p);
            for _ in 0..m {
                let d: u32 = rand::Rng::random_range(&mut rng, 1..9);
                let h = [
                    d as f64,
                    rand::Rng::random_range(&mut rng, 0.0..4.0),
                    rand::Rng::random_range(&mut rng, 0.0..1.0),
                ];
                plain.record(0, d as usize, &h, true);
                weighted.push(&[1.0 / d as f64, h[1] / d as f64, h[2] / d as f64]);
            }
            let via_ratio = ratio_mean(&plain).unwrap();
            let via_map = ratio_map(&sample_mean(&weighted).unwrap()).unwrap();
            for (a, b) in via_ratio.iter().zip(&via_map) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
