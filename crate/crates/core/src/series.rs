//! Truncated dexp, dexp⁻¹ and Baker–Campbell–Hausdorff series, and their
//! natural interval extensions.
//!
//! Conventions (left trivialization, `B_1 = +1/2`):
//!
//! ```text
//! dexp_Θ(A)     = A - 1/2 [Θ,A] + 1/6 [Θ,[Θ,A]] - ...
//! dexp⁻¹_Θ(A)   = A + 1/2 [Θ,A] + 1/12 [Θ,[Θ,A]] + ...
//! bch(Θ₁, Θ₂)   = Θ₁ + Θ₂ + 1/2 [Θ₁,Θ₂] + 1/12 [Θ₁,[Θ₁,Θ₂]] - 1/12 [Θ₂,[Θ₁,Θ₂]] + ...
//! ```
//!
//! where `exp(bch(Θ₁, Θ₂)) = exp(Θ₁) exp(Θ₂)`. On abelian groups every bracket
//! vanishes and the maps reduce to the identity and to vector addition.
//!
//! The interval versions are inclusion functions for the truncated series only.

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::group::{AlgebraVector, GroupModel};
use crate::interval::{iv_cross3, IntervalVector};

/// Highest total polynomial degree kept in the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TruncationOrder {
    Two,
    Three,
}

impl TruncationOrder {
    pub fn degree(self) -> u8 {
        match self {
            TruncationOrder::Two => 2,
            TruncationOrder::Three => 3,
        }
    }
}

impl TryFrom<u8> for TruncationOrder {
    type Error = ReachError;
    fn try_from(d: u8) -> Result<Self> {
        match d {
            2 => Ok(TruncationOrder::Two),
            3 => Ok(TruncationOrder::Three),
            _ => Err(ReachError::InvalidConfig(format!("truncation degree must be 2 or 3, got {d}"))),
        }
    }
}

impl From<TruncationOrder> for u8 {
    fn from(o: TruncationOrder) -> u8 {
        o.degree()
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Truncated `dexp⁻¹_Θ(A)`.
pub fn dexpinv(model: GroupModel, theta: &[f64], a: &[f64], order: TruncationOrder) -> AlgebraVector {
    if model.is_abelian() {
        return AlgebraVector::from(a);
    }
    let ad1 = model.bracket(theta, a);
    let mut out = a.to_vec();
    axpy(&mut out, 0.5, &ad1);
    if order == TruncationOrder::Three {
        axpy(&mut out, 1.0 / 12.0, &model.bracket(theta, &ad1));
    }
    AlgebraVector(out)
}

/// Truncated `dexp_Θ(A)`.
pub fn dexp(model: GroupModel, theta: &[f64], a: &[f64], order: TruncationOrder) -> AlgebraVector {
    if model.is_abelian() {
        return AlgebraVector::from(a);
    }
    let ad1 = model.bracket(theta, a);
    let mut out = a.to_vec();
    axpy(&mut out, -0.5, &ad1);
    if order == TruncationOrder::Three {
        axpy(&mut out, 1.0 / 6.0, &model.bracket(theta, &ad1));
    }
    AlgebraVector(out)
}

/// Truncated `bch(Θ₁, Θ₂)`, solving `exp(Θ₁) exp(Θ₂) = exp(Θ₃)`.
pub fn bch(model: GroupModel, theta1: &[f64], theta2: &[f64], order: TruncationOrder) -> AlgebraVector {
    let mut out: Vec<f64> = theta1.iter().zip(theta2).map(|(a, b)| a + b).collect();
    if model.is_abelian() {
        return AlgebraVector(out);
    }
    let b12 = model.bracket(theta1, theta2);
    axpy(&mut out, 0.5, &b12);
    if order == TruncationOrder::Three {
        axpy(&mut out, 1.0 / 12.0, &model.bracket(theta1, &b12));
        axpy(&mut out, -1.0 / 12.0, &model.bracket(theta2, &b12));
    }
    AlgebraVector(out)
}

fn interval_bracket(model: GroupModel, a: &IntervalVector, b: &IntervalVector) -> Result<IntervalVector> {
    match model {
        GroupModel::So3 => iv_cross3(a, b),
        GroupModel::Torus { factors } => Ok(IntervalVector::from_points(&vec![0.0; factors])),
    }
}

fn check_dim(model: GroupModel, b: &IntervalVector) -> Result<()> {
    if b.len() != model.dim() {
        return Err(ReachError::DimensionMismatch { expected: model.dim(), got: b.len() });
    }
    Ok(())
}

/// Natural inclusion of the truncated `dexp⁻¹` over `Θ ∈ theta_box`, `A ∈ a_box`.
pub fn interval_dexpinv(
    model: GroupModel,
    theta_box: &IntervalVector,
    a_box: &IntervalVector,
    order: TruncationOrder,
) -> Result<IntervalVector> {
    check_dim(model, theta_box)?;
    check_dim(model, a_box)?;
    if model.is_abelian() {
        return Ok(a_box.clone());
    }
    let ad1 = interval_bracket(model, theta_box, a_box)?;
    let mut out = a_box.add(&ad1.scale(0.5))?;
    if order == TruncationOrder::Three {
        let ad2 = interval_bracket(model, theta_box, &ad1)?;
        out = out.add(&ad2.scale(1.0 / 12.0))?;
    }
    Ok(out)
}

/// Inclusion function for `Θ' ↦ bch(Θc, Θ')` over `Θ' ∈ b`.
///
/// The point argument multiplies on the left, so
/// `exp(Θc) exp(Θ') ∈ exp(interval_bch(Θc, b))` up to truncation. Recentering
/// a set `x·exp(b)` at `x·exp(Ω)` therefore uses `interval_bch(-Ω, b)`.
pub fn interval_bch(
    model: GroupModel,
    theta_c: &[f64],
    b: &IntervalVector,
    order: TruncationOrder,
) -> Result<IntervalVector> {
    check_dim(model, b)?;
    if theta_c.len() != model.dim() {
        return Err(ReachError::DimensionMismatch { expected: model.dim(), got: theta_c.len() });
    }
    if model.is_abelian() {
        return b.shift(theta_c);
    }
    let c = IntervalVector::from_points(theta_c);
    let cb = interval_bracket(model, &c, b)?;
    let mut out = b.shift(theta_c)?.add(&cb.scale(0.5))?;
    if order == TruncationOrder::Three {
        let ccb = interval_bracket(model, &c, &cb)?;
        let bcb = interval_bracket(model, b, &cb)?;
        out = out.add(&ccb.scale(1.0 / 12.0))?.sub(&bcb.scale(1.0 / 12.0))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{iv_contains, Interval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SO3: GroupModel = GroupModel::So3;
    const ORDERS: [TruncationOrder; 2] = [TruncationOrder::Two, TruncationOrder::Three];

    /// `Σ_{k≤10} B_k/k! ad_Θ^k A` with `B_1 = +1/2`.
    fn dexpinv_series_oracle(theta: &[f64], a: &[f64]) -> Vec<f64> {
        const BERNOULLI: [f64; 11] =
            [1.0, 0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0, -1.0 / 30.0, 0.0, 5.0 / 66.0];
        let mut term = a.to_vec();
        let mut out = a.to_vec();
        let mut fact = 1.0;
        for (k, bk) in BERNOULLI.iter().enumerate().skip(1) {
            term = SO3.bracket(theta, &term).0;
            fact *= k as f64;
            axpy(&mut out, bk / fact, &term);
        }
        out
    }

    /// `Σ_{k≤12} (-1)^k/(k+1)! ad_Θ^k A`.
    fn dexp_series_oracle(theta: &[f64], a: &[f64]) -> Vec<f64> {
        let mut term = a.to_vec();
        let mut out = a.to_vec();
        let mut fact = 1.0;
        for k in 1..=12 {
            term = SO3.bracket(theta, &term).0;
            fact *= (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            axpy(&mut out, sign / fact, &term);
        }
        out
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn diff(a: &[f64], b: &[f64]) -> f64 {
        norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-r..=r)).collect()
    }

    fn rand_box(rng: &mut ChaCha8Rng, center_radius: f64, max_width: f64) -> IntervalVector {
        let c = rand_vec(rng, 3, center_radius);
        c.iter()
            .map(|&ci| {
                let w = rng.random_range(0.0..=max_width);
                Interval::new(ci - 0.5 * w, ci + 0.5 * w).unwrap()
            })
            .collect()
    }

    fn sample_box(rng: &mut ChaCha8Rng, b: &IntervalVector) -> Vec<f64> {
        b.iter().map(|i| if i.is_degenerate() { i.lo() } else { rng.random_range(i.lo()..=i.hi()) }).collect()
    }

    #[test]
    fn zero_theta_is_identity() {
        let a = [0.3, -1.2, 2.0];
        for o in ORDERS {
            assert_eq!(dexpinv(SO3, &[0.0; 3], &a, o).0, a.to_vec());
            assert_eq!(dexp(SO3, &[0.0; 3], &a, o).0, a.to_vec());
            assert_eq!(bch(SO3, &a, &[0.0; 3], o).0, a.to_vec());
            assert_eq!(bch(SO3, &[0.0; 3], &a, o).0, a.to_vec());
        }
    }

    #[test]
    fn abelian_maps_are_trivial() {
        let t = GroupModel::torus2();
        for o in ORDERS {
            assert_eq!(dexpinv(t, &[1.0, -2.0], &[0.5, 0.25], o).0, vec![0.5, 0.25]);
            assert_eq!(dexp(t, &[1.0, -2.0], &[0.5, 0.25], o).0, vec![0.5, 0.25]);
            assert_eq!(bch(t, &[1.0, -2.0], &[0.5, 0.25], o).0, vec![1.5, -1.75]);
        }
        // exp(X) exp(Y) = exp(X + Y)
        let (x, y) = ([0.7, -1.1], [0.4, 0.9]);
        let lhs = t.exp(&x).unwrap().compose(&t.exp(&y).unwrap()).unwrap();
        let rhs = t.exp(&bch(t, &x, &y, TruncationOrder::Two)).unwrap();
        assert!(lhs.distance_max(&rhs) < 1e-15);
    }

    #[test]
    fn dexpinv_degree_three_value() {
        let theta = [0.1, 0.0, 0.0];
        let a = [0.0, 1.0, 0.0];
        let got = dexpinv(SO3, &theta, &a, TruncationOrder::Three);
        let expected = [0.0, 1.0 - 1.0 / 1200.0, 0.05];
        assert!(diff(&got, &expected) < 1e-15);
        let oracle = dexpinv_series_oracle(&theta, &a);
        // first omitted term is B_4/4! |Θ|^4 |A| ~ 1.4e-7
        assert!(diff(&got, &oracle) < 2e-7);
        assert!(diff(&got, &oracle) > 1e-8);
    }

    #[test]
    fn truncation_error_scales_with_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let theta = rand_vec(&mut rng, 3, 0.3);
            let a = rand_vec(&mut rng, 3, 1.0);
            let oracle = dexpinv_series_oracle(&theta, &a);
            let (t, an) = (norm(&theta), norm(&a));
            let e2 = diff(&dexpinv(SO3, &theta, &a, TruncationOrder::Two), &oracle);
            let e3 = diff(&dexpinv(SO3, &theta, &a, TruncationOrder::Three), &oracle);
            assert!(e2 <= 0.1 * t * t * an + 1e-15);
            assert!(e3 <= 0.01 * t.powi(4) * an + 1e-15);
        }
    }

    #[test]
    fn dexp_oracle_matches_closed_form_inverse() {
        // the oracles are mutually inverse to high order
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..100 {
            let theta = rand_vec(&mut rng, 3, 0.3);
            let a = rand_vec(&mut rng, 3, 1.0);
            let back = dexp_series_oracle(&theta, &dexpinv_series_oracle(&theta, &a));
            assert!(diff(&back, &a) < 1e-9);
        }
    }

    #[test]
    fn dexp_after_dexpinv_is_identity_to_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..500 {
            let theta = rand_vec(&mut rng, 3, 0.3);
            let a = rand_vec(&mut rng, 3, 1.0);
            let (t, an) = (norm(&theta), norm(&a));
            for (o, p) in [(TruncationOrder::Two, 2), (TruncationOrder::Three, 3)] {
                let back = dexp(SO3, &theta, &dexpinv(SO3, &theta, &a, o), o);
                // sign errors in the first-order terms would leave |Θ||A| residue
                assert!(diff(&back, &a) <= 0.5 * t.powi(p) * an + 1e-15, "{o:?}");
            }
        }
    }

    #[test]
    fn bch_matches_group_product() {
        let (a, b) = (0.05, -0.08);
        let got = bch(SO3, &[a, 0.0, 0.0], &[0.0, b, 0.0], TruncationOrder::Two);
        assert_eq!(got.0, vec![a, b, a * b / 2.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..300 {
            let x = rand_vec(&mut rng, 3, 0.2);
            let y = rand_vec(&mut rng, 3, 0.2);
            let exact = SO3.log(&SO3.exp(&x).unwrap().compose(&SO3.exp(&y).unwrap()).unwrap()).unwrap();
            let s = norm(&x) + norm(&y);
            let e2 = diff(&bch(SO3, &x, &y, TruncationOrder::Two), &exact);
            let e3 = diff(&bch(SO3, &x, &y, TruncationOrder::Three), &exact);
            assert!(e2 <= 0.1 * s.powi(3), "{e2} vs {s}");
            assert!(e3 <= 0.05 * s.powi(4), "{e3} vs {s}");
        }
    }

    #[test]
    fn degree_three_correction_is_cubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let x = rand_vec(&mut rng, 3, 0.5);
            let y = rand_vec(&mut rng, 3, 0.5);
            let d = diff(&bch(SO3, &x, &y, TruncationOrder::Three), &bch(SO3, &x, &y, TruncationOrder::Two));
            worst = worst.max(d / (norm(&x) + norm(&y)).powi(3));
        }
        // |1/12 [x,[x,y]] - 1/12 [y,[x,y]]| <= (|x| + |y|)^3 / 12
        assert!(worst <= 1.0 / 12.0);
    }

    #[test]
    fn interval_versions_exact_on_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for o in ORDERS {
            for _ in 0..100 {
                let t = rand_vec(&mut rng, 3, 0.5);
                let a = rand_vec(&mut rng, 3, 1.0);
                let d = interval_dexpinv(SO3, &IntervalVector::from_points(&t), &IntervalVector::from_points(&a), o)
                    .unwrap();
                assert_eq!(d, IntervalVector::from_points(&dexpinv(SO3, &t, &a, o)));
                let b = interval_bch(SO3, &t, &IntervalVector::from_points(&a), o).unwrap();
                assert_eq!(b, IntervalVector::from_points(&bch(SO3, &t, &a, o)));
            }
        }
    }

    #[test]
    fn interval_dexpinv_sampling_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for o in ORDERS {
            for _ in 0..20 {
                let tb = rand_box(&mut rng, 0.5, 0.2);
                let ab = rand_box(&mut rng, 1.0, 0.2);
                let out = interval_dexpinv(SO3, &tb, &ab, o).unwrap();
                for _ in 0..1000 {
                    let t = sample_box(&mut rng, &tb);
                    let a = sample_box(&mut rng, &ab);
                    assert!(iv_contains(&out, &dexpinv(SO3, &t, &a, o), 1e-12).unwrap());
                }
            }
        }
    }

    #[test]
    fn interval_bch_sampling_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for o in ORDERS {
            for _ in 0..20 {
                let c = rand_vec(&mut rng, 3, 0.5);
                let b = rand_box(&mut rng, 0.5, 0.2);
                let out = interval_bch(SO3, &c, &b, o).unwrap();
                for _ in 0..1000 {
                    let t = sample_box(&mut rng, &b);
                    assert!(iv_contains(&out, &bch(SO3, &c, &t, o), 1e-12).unwrap());
                }
            }
        }
    }

    #[test]
    fn abelian_interval_maps() {
        let t = GroupModel::torus2();
        let b = IntervalVector::from_bounds(&[-0.6, -0.1], &[0.6, 0.1]).unwrap();
        let a = IntervalVector::from_bounds(&[1.0, 2.0], &[1.5, 2.5]).unwrap();
        assert_eq!(interval_dexpinv(t, &b, &a, TruncationOrder::Three).unwrap(), a);
        let shifted = interval_bch(t, &[0.25, -0.5], &b, TruncationOrder::Three).unwrap();
        assert_eq!(shifted, IntervalVector::from_bounds(&[-0.35, -0.6], &[0.85, -0.4]).unwrap());
        assert_eq!(interval_bch(t, &[0.0, 0.0], &b, TruncationOrder::Two).unwrap(), b);
    }

    #[test]
    fn recentering_convention_on_fig2_box() {
        // x·exp(Θ') = x·exp(Ω)·exp(bch(-Ω, Θ')): the recentered box must hold
        // log(exp(-Ω) exp(Θ')) for every Θ' of the original box.
        let b = IntervalVector::from_bounds(&[0.2; 3], &[0.4; 3]).unwrap();
        let omega = [0.3; 3];
        let neg = [-0.3; 3];
        let out = interval_bch(SO3, &neg, &b, TruncationOrder::Three).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..500 {
            let t = sample_box(&mut rng, &b);
            let exact = SO3.log(&SO3.exp(&neg).unwrap().compose(&SO3.exp(&t).unwrap()).unwrap()).unwrap();
            assert!(iv_contains(&out, &exact, 1e-4).unwrap());
            let x = SO3.exp(&omega).unwrap().compose(&SO3.exp(&exact).unwrap()).unwrap();
            assert!(x.distance_max(&SO3.exp(&t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn swapped_argument_order_is_not_a_recentering() {
        // Θ' "+" Θc with the point on the right describes exp(Θ') exp(Θc),
        // which is a different set. A thin box off the rotation axis exposes it.
        let b = IntervalVector::from_bounds(&[0.0, 0.5, 0.0], &[0.0, 0.5, 0.0]).unwrap();
        let neg = [0.0, 0.0, -0.4];
        let t = [0.0, 0.5, 0.0];
        let exact = SO3.log(&SO3.exp(&neg).unwrap().compose(&SO3.exp(&t).unwrap()).unwrap()).unwrap();
        let right = interval_bch(SO3, &neg, &b, TruncationOrder::Three).unwrap();
        assert!(iv_contains(&right, &exact, 1e-3).unwrap());
        let wrong = IntervalVector::from_points(&bch(SO3, &t, &neg, TruncationOrder::Three));
        assert!(!iv_contains(&wrong, &exact, 1e-3).unwrap());
    }
}
