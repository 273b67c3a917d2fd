use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernel::{nullspace, ortho_projector, subspace_from_span};
use crate::sampling::{
    random_matrix, random_subspace, random_subspace_meeting_null, random_weight,
};
use crate::testutil::{assert_close, mat};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn weight(n: usize, data: &[f64]) -> PsdOperator {
    PsdOperator::new(&Operator::new(n, n, data).unwrap(), &tol()).unwrap()
}

fn span(n: usize, cols: &[&[f64]]) -> Subspace {
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    subspace_from_span(&Operator::wrap(m), &tol())
}

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Null space of a projection matrix read off as the range of `I − Q`.
fn null_of(q: &DMatrix<f64>) -> Subspace {
    let n = q.nrows();
    let scale = linalg::spectral_norm(q).max(1.0);
    Subspace::span_scaled(&(DMatrix::identity(n, n) - q), scale, &tol())
}

#[test]
fn block_decompose_examples() {
    let i3 = weight(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let s = span(3, &[&[1.0, 1.0, 0.0]]);
    let bl = block_decompose(&i3, &s).unwrap();
    assert_close(bl.a().as_matrix(), &DMatrix::identity(1, 1), 1e-14);
    assert_close(bl.b().as_matrix(), &DMatrix::zeros(1, 2), 1e-14);
    assert_close(bl.c().as_matrix(), &DMatrix::identity(2, 2), 1e-14);

    let a = weight(2, &[1.0, 0.0, 0.0, 2.0]);
    let bl = block_decompose(&a, &span(2, &[&[1.0, 0.0]])).unwrap();
    assert_close(bl.a().as_matrix(), &mat(1, 1, &[1.0]), 1e-14);
    assert_close(bl.b().as_matrix(), &mat(1, 1, &[0.0]), 1e-14);
    assert_close(bl.c().as_matrix(), &mat(1, 1, &[2.0]), 1e-14);

    // (1,1)/√2 and (1,-1)/√2 are eigenvectors of [[2,1],[1,2]] for 3 and 1.
    let a = weight(2, &[2.0, 1.0, 1.0, 2.0]);
    let bl = block_decompose(&a, &span(2, &[&[R, R]])).unwrap();
    assert_close(bl.a().as_matrix(), &mat(1, 1, &[3.0]), 1e-12);
    assert_close(bl.b().as_matrix(), &mat(1, 1, &[0.0]), 1e-12);
    assert_close(bl.c().as_matrix(), &mat(1, 1, &[1.0]), 1e-12);
    assert_close(bl.reassemble().as_matrix(), a.base().as_matrix(), 1e-12);
}

#[test]
fn block_decompose_rejects_mismatched_dims() {
    let a = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(
        block_decompose(&a, &Subspace::full(3)),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn compatibility_examples() {
    let ones = weight(2, &[1.0, 1.0, 1.0, 1.0]);
    let e1 = span(2, &[&[1.0, 0.0]]);
    assert!(is_compatible(&ones, &e1, &tol()).unwrap());
    assert!(sum_covers_space(&ones, &e1, &tol()).unwrap());
    assert_close(
        block_solution(&ones, &e1, &tol()).unwrap().as_matrix(),
        &mat(1, 1, &[1.0]),
        1e-12,
    );

    let zero = weight(3, &[0.0; 9]);
    let s = span(3, &[&[1.0, 2.0, 0.0]]);
    assert!(is_compatible(&zero, &s, &tol()).unwrap());
    assert_eq!(
        preimage(zero.base(), &complement(&s), &tol())
            .unwrap()
            .dim(),
        3
    );
}

#[test]
fn pas_examples() {
    let i2 = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    let s = span(2, &[&[1.0, 2.0]]);
    let p = pas(&i2, &s, &tol()).unwrap();
    assert_close(p.matrix().as_matrix(), &s.projector(), 1e-12);

    let ones = weight(2, &[1.0, 1.0, 1.0, 1.0]);
    let e1 = span(2, &[&[1.0, 0.0]]);
    let p = pas(&ones, &e1, &tol()).unwrap();
    let q = p.matrix().as_matrix();
    assert_close(q, &mat(2, 2, &[1.0, 1.0, 0.0, 0.0]), 1e-12);
    let am = ones.base().as_matrix();
    assert_close(&(am * q), &mat(2, 2, &[1.0, 1.0, 1.0, 1.0]), 1e-12);
    assert_close(
        &(q.transpose() * am),
        &mat(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        1e-12,
    );

    // N = S here, so the nullspace is A^{-1}(S^⊥) ⊖ S = span(e2).
    let a = weight(2, &[0.0, 0.0, 0.0, 1.0]);
    let p = pas(&a, &e1, &tol()).unwrap();
    assert_close(
        p.matrix().as_matrix(),
        &mat(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        1e-12,
    );
    assert!(degenerate_part(&a, &e1, &tol())
        .unwrap()
        .equals(&e1, &tol()));
    assert!(p.nullspace().equals(&span(2, &[&[0.0, 1.0]]), &tol()));
}

#[test]
fn pas_invertible_examples() {
    let i2 = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    let s = span(2, &[&[3.0, -1.0]]);
    assert_close(
        pas_invertible(&i2, &s).unwrap().matrix().as_matrix(),
        &s.projector(),
        1e-12,
    );
    let e1 = span(2, &[&[1.0, 0.0]]);
    let a = weight(2, &[1.0, 0.0, 0.0, 2.0]);
    assert_close(
        pas_invertible(&a, &e1).unwrap().matrix().as_matrix(),
        &mat(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        1e-12,
    );
    let a = weight(2, &[2.0, 1.0, 1.0, 1.0]);
    let inv = pas_invertible(&a, &e1).unwrap();
    assert_close(
        inv.matrix().as_matrix(),
        &mat(2, 2, &[1.0, 0.5, 0.0, 0.0]),
        1e-12,
    );
    assert_close(
        inv.matrix().as_matrix(),
        pas(&a, &e1, &tol()).unwrap().matrix().as_matrix(),
        1e-12,
    );
    let singular = weight(2, &[1.0, 1.0, 1.0, 1.0]);
    assert!(matches!(
        pas_invertible(&singular, &e1),
        Err(Error::Singular { rank: 1, dim: 2 })
    ));
}

#[test]
fn pas_closed_range_examples() {
    let e1 = span(2, &[&[1.0, 0.0]]);
    let i2 = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    assert_close(
        pas_closed_range(&i2, &e1).unwrap().matrix().as_matrix(),
        &e1.projector(),
        1e-12,
    );
    let a = weight(2, &[0.0, 0.0, 0.0, 1.0]);
    // (PAP)^† PA vanishes because PAP = 0; P_N = diag(1, 0).
    assert_close(
        &closed_range_part(&a, &e1, &tol()),
        &DMatrix::zeros(2, 2),
        1e-14,
    );
    assert_close(
        pas_closed_range(&a, &e1).unwrap().matrix().as_matrix(),
        &mat(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        1e-12,
    );
    let ones = weight(2, &[1.0, 1.0, 1.0, 1.0]);
    assert_close(
        pas_closed_range(&ones, &e1).unwrap().matrix().as_matrix(),
        pas(&ones, &e1, &tol()).unwrap().matrix().as_matrix(),
        1e-12,
    );
}

#[test]
fn krein_examples() {
    let e1 = span(2, &[&[1.0, 0.0]]);
    let i2 = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    assert!(krein_check(&ortho_projector(&e1), &i2, &e1).unwrap());

    let ones = weight(2, &[1.0, 1.0, 1.0, 1.0]);
    let good = ObliqueProjection::from_matrix(
        &Operator::new(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap(),
        &tol(),
    )
    .unwrap();
    assert!(krein_check(&good, &ones, &e1).unwrap());
    let bad = ObliqueProjection::from_matrix(
        &Operator::new(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
        &tol(),
    )
    .unwrap();
    assert_eq!(krein_verdicts(&bad, &ones, &e1).unwrap(), (false, false));
    assert!(!krein_check(&bad, &ones, &e1).unwrap());

    let e2 = span(2, &[&[0.0, 1.0]]);
    assert!(matches!(
        krein_check(&bad, &ones, &e2),
        Err(Error::RangeMismatch)
    ));
}

#[test]
fn family_member_examples() {
    let e1 = span(2, &[&[1.0, 0.0]]);
    let a = weight(2, &[0.0, 0.0, 0.0, 1.0]);
    let base = pas(&a, &e1, &tol()).unwrap();
    let zero = family_member(&a, &e1, &Operator::zeros(1, 1)).unwrap();
    assert_close(zero.matrix().as_matrix(), base.matrix().as_matrix(), 1e-14);
    for t in [-1.0, 0.5, 3.0] {
        let q = family_member(&a, &e1, &Operator::new(1, 1, &[t]).unwrap()).unwrap();
        let qm = q.matrix().as_matrix();
        assert_close(qm, &mat(2, 2, &[1.0, t, 0.0, 0.0]), 1e-12);
        // A Q = [[0,0],[0,0]] = Qᵀ A for every t.
        let am = a.base().as_matrix();
        assert_close(&(am * qm), &(qm.transpose() * am), 1e-12);
        assert!(krein_check(&q, &a, &e1).unwrap());
    }

    // Trivial N: only the empty T is accepted.
    let i2 = weight(2, &[1.0, 0.0, 0.0, 1.0]);
    assert!(family_member(&i2, &e1, &Operator::zeros(0, 1)).is_ok());
    assert!(matches!(
        family_member(&i2, &e1, &Operator::zeros(1, 1)),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn diagnostics_examples() {
    let s = span(3, &[&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]]);
    let i3 = weight(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let rep = diagnostics_chain(&i3, &s, &tol()).unwrap();
    assert!(rep.all_flags() && rep.sum_check && rep.degenerate.is_zero());

    let a = weight(2, &[1.0, 0.0, 0.0, 0.0]);
    let diag = span(2, &[&[R, R]]);
    let rep = diagnostics_chain(&a, &diag, &tol()).unwrap();
    assert!(rep.all_flags());
    assert_eq!(rep.range_projection_compat, [true; 3]);
    let projected = image(a.range_proj(), &diag, &tol()).unwrap();
    assert!(projected.equals(&span(2, &[&[1.0, 0.0]]), &tol()));

    let zero = weight(2, &[0.0; 4]);
    let rep = diagnostics_chain(&zero, &diag, &tol()).unwrap();
    assert!(rep.all_flags());
    assert!(rep.degenerate.equals(&diag, &tol()));
    assert!(rep.preimage_perp.equals(&Subspace::full(2), &tol()));
    let p = rep.pas.unwrap();
    assert_close(p.matrix().as_matrix(), &diag.projector(), 1e-12);
    assert!(p.nullspace().equals(&complement(&diag), &tol()));
}

#[test]
fn implication_check_catches_broken_chains() {
    let a = weight(2, &[1.0, 0.0, 0.0, 0.0]);
    let mut rep = diagnostics_chain(&a, &span(2, &[&[1.0, 0.0]]), &tol()).unwrap();
    assert!(rep.implications_respected());
    rep.chain[3] = false;
    assert!(!rep.implications_respected());
    rep.chain = [false, false, false, false, true, true];
    assert!(rep.implications_respected());
    rep.chain[2] = true;
    assert!(!rep.implications_respected());
}

fn instance(seed: u64) -> (PsdOperator, Subspace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=7usize);
    let r = rng.random_range(0..=n);
    let k = rng.random_range(0..=n);
    let a = random_weight(&mut rng, n, r, &tol());
    let s = if rng.random_bool(0.5) {
        random_subspace(&mut rng, n, k)
    } else {
        let overlap = rng.random_range(0..=k);
        random_subspace_meeting_null(&mut rng, &a, k, overlap)
    };
    (a, s)
}

use rand::Rng;

#[test]
fn random_projection_laws() {
    for seed in 0..150 {
        let (a, s) = instance(seed);
        let p = pas(&a, &s, &tol()).unwrap();
        let q = p.matrix().as_matrix();
        let am = a.base().as_matrix();
        assert!((q * q - q).norm() <= 1e-8, "seed {seed}");
        assert!(
            (am * q - q.transpose() * am).norm() <= 1e-8 * (1.0 + a.norm()),
            "seed {seed}"
        );
        let range = subspace_from_span(p.matrix(), &tol());
        assert!(range.equals(&s, &tol()), "seed {seed}");
        assert!(
            null_of(q).equals(&pas_nullspace(&a, &s, &tol()).unwrap(), &tol()),
            "seed {seed}"
        );
        assert!(krein_check(&p, &a, &s).unwrap());
    }
}

#[test]
fn random_construction_agreement() {
    for seed in 0..150 {
        let (a, s) = instance(seed);
        let block = pas(&a, &s, &tol()).unwrap();
        let pinv = pas_closed_range(&a, &s).unwrap();
        assert_close(block.matrix().as_matrix(), pinv.matrix().as_matrix(), 1e-7);
        if a.is_invertible() {
            let inv = pas_invertible(&a, &s).unwrap();
            assert_close(block.matrix().as_matrix(), inv.matrix().as_matrix(), 1e-7);
        }
    }
}

#[test]
fn random_norm_minimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    for seed in 0..200 {
        let (a, s) = instance(seed);
        let n = degenerate_part(&a, &s, &tol()).unwrap();
        if n.is_zero() || n.dim() == s.dim() && s.dim() == a.dim() {
            continue;
        }
        tested += 1;
        let base = pas(&a, &s, &tol()).unwrap().matrix().spectral_norm();
        let cols = a.dim() - s.dim();
        for _ in 0..30 {
            let t = random_matrix(&mut rng, n.dim(), cols);
            let q = family_member(&a, &s, &t).unwrap();
            assert!(base <= q.matrix().spectral_norm() + 1e-10, "seed {seed}");
            assert!(krein_check(&q, &a, &s).unwrap());
        }
    }
    assert!(tested > 20);
}

#[test]
fn sqrt_decomposition_examples() {
    // A^{1/2}(S) ⊕ (A^{1/2}(S)^⊥ ∩ R(A^{1/2})) = R(A^{1/2}).
    for seed in 0..100 {
        let (a, s) = instance(seed);
        let m = image(a.sqrt(), &s, &tol()).unwrap();
        let r = kernel::range(a.sqrt(), &tol());
        let rest = intersect(&complement(&m), &r, &tol()).unwrap();
        assert!(
            sum(&m, &rest, &tol()).unwrap().equals(&r, &tol()),
            "seed {seed}"
        );
    }
}

#[test]
fn sqrt_route_matches_closed_range_part() {
    for seed in 0..100 {
        let (a, s) = instance(seed);
        let x = sqrt_reduced_solution(&a, &s, &tol()).unwrap();
        // It solves A^{1/2} P X = P_M A^{1/2} and agrees with (PAP)^† PA.
        let lhs = a.sqrt().as_matrix() * s.projector() * x.as_matrix();
        let m = image(a.sqrt(), &s, &tol()).unwrap();
        assert_close(&lhs, &(m.projector() * a.sqrt().as_matrix()), 1e-8);
        assert_close(x.as_matrix(), &closed_range_part(&a, &s, &tol()), 1e-7);
        let p = pas(&a, &s, &tol()).unwrap();
        let n = degenerate_part(&a, &s, &tol()).unwrap();
        assert_close(
            &(x.as_matrix() + n.projector()),
            p.matrix().as_matrix(),
            1e-7,
        );
    }
}

#[test]
fn direct_sum_when_s_misses_null_space() {
    for seed in 0..100 {
        let (a, s) = instance(seed);
        if !degenerate_part(&a, &s, &tol()).unwrap().is_zero() {
            continue;
        }
        let a_s_perp = complement(&image(a.base(), &s, &tol()).unwrap());
        assert_eq!(s.dim() + a_s_perp.dim(), a.dim(), "seed {seed}");
        assert!(
            intersect(&s, &a_s_perp, &tol()).unwrap().is_zero(),
            "seed {seed}"
        );
    }
}

#[test]
fn random_chain_is_all_true() {
    for seed in 0..100 {
        let (a, s) = instance(seed);
        let rep = diagnostics_chain(&a, &s, &tol()).unwrap();
        assert!(rep.all_flags(), "seed {seed}: {:?}", rep.chain);
        assert_eq!(rep.compatible, rep.sum_check);
        assert_eq!(rep.range_projection_compat, [true; 3]);
        assert!(rep.angle_cosine < 1.0 - 1e-12);
    }
}

#[test]
fn nullspace_of_pas_is_a_complement_of_s() {
    for seed in 0..60 {
        let (a, s) = instance(seed);
        let p = pas(&a, &s, &tol()).unwrap();
        assert_eq!(p.range().dim() + p.nullspace().dim(), a.dim());
        let ker = nullspace(p.matrix(), &tol());
        assert!(ker.equals(p.nullspace(), &tol()), "seed {seed}");
    }
}

#[test]
fn unresolved_direction_is_not_compatible() {
    // S leans 1e-3 away from N(A); at rank_rel 1e-4 the angle is seen but A
    // squashes the leaning direction below the cutoff.
    let coarse = tol().with_rank_rel(1e-4).unwrap();
    let a = PsdOperator::new(&Operator::diagonal(&[1.0, 1e-6]).unwrap(), &coarse).unwrap();
    let t = 1e-3f64;
    let s = span(2, &[&[t.sin(), t.cos()]]);
    assert!(degenerate_part(&a, &s, &coarse).unwrap().is_zero());
    assert!(!is_compatible(&a, &s, &coarse).unwrap());
    assert_eq!(pas(&a, &s, &coarse), Err(Error::Incompatible));
    let rep = diagnostics_chain(&a, &s, &coarse).unwrap();
    assert!(!rep.chain[0] && rep.implications_respected());

    let fine = PsdOperator::new(&Operator::diagonal(&[1.0, 1e-6]).unwrap(), &tol()).unwrap();
    let rep = diagnostics_chain(&fine, &s, &tol()).unwrap();
    assert!(rep.all_flags());
}

#[test]
fn chain_flags_respect_implications_under_coarse_tolerances() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for rank_rel in [1e-8, 1e-6, 1e-4] {
        let coarse = tol().with_rank_rel(rank_rel).unwrap();
        for _ in 0..40 {
            let n = 5;
            let base = random_weight(&mut rng, n, 3, &tol())
                .base()
                .as_matrix()
                .clone();
            let bump = random_weight(&mut rng, n, 2, &tol()).base().as_matrix() * 1e-5;
            let a = PsdOperator::new(&Operator::wrap(base + bump), &coarse).unwrap();
            let s = random_subspace_meeting_null(&mut rng, &a, 3, 1);
            let rep = diagnostics_chain(&a, &s, &coarse).unwrap();
            assert!(rep.implications_respected(), "{:?}", rep.chain);
        }
    }
}
