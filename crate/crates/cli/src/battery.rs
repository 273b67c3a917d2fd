//! The identity battery behind `oblique report`. Every check records whether
//! it passed and the largest defect seen; randomized checks draw from a
//! ChaCha stream seeded by `--seed`.

use nalgebra::DVector;
use oblique_core::io::{matrix_json, subspace_json};
use oblique_core::kernel::{complement, image, ortho_projector};
use oblique_core::oblique as obl;
use oblique_core::sampling::random_matrix;
use oblique_core::{douglas, interpolant, oprange};
use oblique_core::{ObliqueProjection, Operator, PsdOperator, Subspace, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::job::{chain_json, JobError, Sections};

const SAMPLES: usize = 20;

struct Checks(Map<String, Value>);

impl Checks {
    fn record(&mut self, name: &str, pass: bool, defect: f64) {
        self.0
            .insert(name.into(), json!({ "pass": pass, "defect": defect }));
    }
}

fn vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    random_matrix(rng, n, 1)
        .into_matrix()
        .column(0)
        .into_owned()
}

pub fn run(
    a: &PsdOperator,
    s: &Subspace,
    tol: &Tolerance,
    seed: u64,
) -> Result<Sections, JobError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Checks(Map::new());
    let n = a.dim();
    let am = a.base().as_matrix();
    let eq = tol.eq_abs();
    let herm_bound = eq * (1.0 + a.norm());

    let rep = obl::diagnostics_chain(a, s, tol)?;
    c.record(
        "compatible_matches_sum",
        rep.compatible == rep.sum_check,
        0.0,
    );
    c.record("chain_all_true", rep.all_flags(), 0.0);
    c.record("chain_implications", rep.implications_respected(), 0.0);
    c.record(
        "range_projection_compat_agree",
        rep.range_projection_compat
            .iter()
            .all(|&f| f == rep.compatible),
        0.0,
    );

    let p = obl::pas(a, s, tol)?;
    let pm = p.matrix().as_matrix();
    let idem = p.idempotency_defect();
    c.record("pas_idempotent", idem <= eq, idem);
    let herm = (am * pm - pm.transpose() * am).norm();
    c.record("pas_a_hermitian", herm <= herm_bound, herm);
    let range = oblique_core::kernel::range(p.matrix(), tol);
    c.record("pas_range_is_s", range.equals(s, tol), range.distance(s));
    let expected_null = obl::pas_nullspace(a, s, tol)?;
    let null = oblique_core::kernel::nullspace(p.matrix(), tol);
    c.record(
        "pas_nullspace",
        null.equals(&expected_null, tol),
        null.distance(&expected_null),
    );

    let closed = obl::pas_closed_range(a, s)?;
    let gap = (closed.matrix().as_matrix() - pm).norm();
    c.record("pas_matches_pinv_formula", gap <= 10.0 * eq, gap);
    if a.is_invertible() {
        let inv = obl::pas_invertible(a, s)?;
        let gap = (inv.matrix().as_matrix() - pm).norm();
        c.record("pas_matches_invertible_formula", gap <= 10.0 * eq, gap);
    }
    let sqrt_route = obl::sqrt_reduced_solution(a, s, tol)?;
    let n_part = obl::degenerate_part(a, s, tol)?;
    let gap = (sqrt_route.as_matrix() + n_part.projector() - pm).norm();
    c.record("pas_matches_sqrt_route", gap <= 10.0 * eq, gap);

    // Family members and arbitrary projections with range S.
    let s_perp = complement(s);
    let base_norm = p.matrix().spectral_norm();
    let base_theta = oprange::theta(a, p.matrix(), tol)?;
    let (mut disagreements, mut family_ok, mut min_gap, mut theta_gap) =
        (0usize, true, f64::INFINITY, 0.0f64);
    for _ in 0..SAMPLES {
        let t = random_matrix(&mut rng, n_part.dim(), s_perp.dim());
        let q = obl::family_member(a, s, &t)?;
        let (alg, cont) = obl::krein_verdicts(&q, a, s)?;
        disagreements += usize::from(alg != cont);
        family_ok &= alg;
        min_gap = min_gap.min(q.matrix().spectral_norm() - base_norm);
        let ext = oprange::theta(a, q.matrix(), tol)?;
        theta_gap =
            theta_gap.max((ext.chart().as_matrix() - base_theta.chart().as_matrix()).norm());

        let x = random_matrix(&mut rng, s.dim(), s_perp.dim());
        let arbitrary = s.basis_matrix()
            * (s.basis_matrix().transpose() + x.as_matrix() * s_perp.basis_matrix().transpose());
        let q = ObliqueProjection::from_matrix(
            &Operator::from_matrix(arbitrary).map_err(JobError::from)?,
            tol,
        )?;
        let (alg, cont) = obl::krein_verdicts(&q, a, s)?;
        disagreements += usize::from(alg != cont);
    }
    c.record(
        "krein_forms_agree",
        disagreements == 0,
        disagreements as f64,
    );
    c.record("family_members_a_hermitian", family_ok, 0.0);
    if min_gap.is_finite() {
        c.record("pas_norm_minimal", min_gap >= -1e-10, min_gap);
    }
    c.record("family_theta_constant", theta_gap <= 10.0 * eq, theta_gap);

    // Douglas step on the blocks.
    let blocks = obl::block_decompose(a, s)?;
    let reassembled = (blocks.reassemble().as_matrix() - am).norm();
    c.record(
        "blocks_reassemble",
        reassembled <= eq * (1.0 + a.norm()),
        reassembled,
    );
    if rep.compatible && blocks.a().rows() > 0 && blocks.b().cols() > 0 {
        if let Ok(sol) = douglas::reduced_solution(blocks.a(), blocks.b(), tol) {
            let lambda = douglas::minimal_lambda(blocks.a(), blocks.b(), tol)?;
            let rel = (lambda - sol.norm_sq()).abs() / sol.norm_sq().max(1.0);
            c.record("block_lambda_matches_norm", rel <= 1e-6, rel);
        }
    }

    // Range space.
    let (mut iso, mut minimal) = (0.0f64, true);
    for _ in 0..SAMPLES {
        let (x, y) = (vector(&mut rng, n), vector(&mut rng, n));
        let ax = oprange::lift(a, &(am * &x), tol)?;
        let ay = oprange::lift(a, &(am * &y), tol)?;
        let lhs = oprange::range_inner(&ax, &ay)?;
        iso = iso.max((lhs - (am * &x).dot(&y)).abs());
        let null = a.null_space();
        let noisy = ax.witness() + null.basis_matrix() * vector(&mut rng, null.dim());
        minimal &= ax.norm() <= noisy.norm() + eq;
    }
    c.record("range_isometry", iso <= eq * (1.0 + a.norm()), iso);
    c.record("witness_minimal", minimal, 0.0);
    c.record(
        "theta_pas_is_qas",
        oprange::theta_pas_identity(a, s, tol)?,
        0.0,
    );
    let (_, img_eq) = oprange::qas_range_image(a, s, tol)?;
    c.record(
        "qas_range_image_matches_compat",
        img_eq == rep.compatible,
        0.0,
    );
    let sharp = oprange::sharp_projection(a, s, tol)?;
    let sm = sharp.as_matrix();
    let d = (sm * sm - sm).norm();
    c.record("sharp_idempotent", d <= eq, d);
    let d = (sm - a.range_proj().as_matrix() * pm).norm();
    c.record("sharp_is_range_part_of_pas", d <= 10.0 * eq, d);
    c.record(
        "dense_sum",
        oprange::dense_sum_check(a, s, tol)? == rep.compatible,
        0.0,
    );
    let (i, ii, iii) = oprange::compatibility_characterizations(a, s, tol)?;
    c.record(
        "range_space_characterizations",
        i == ii && ii == iii && i == rep.compatible,
        0.0,
    );

    // Interpolation.
    let (mut gap, mut optimal) = (0.0f64, true);
    for _ in 0..SAMPLES {
        let x = vector(&mut rng, n);
        let res = interpolant::spline_from_weight(a, s, &x, tol)?;
        let oracle = interpolant::spline_oracle(a.sqrt(), s, &x, tol)?;
        gap = gap.max((res.minimizer() - oracle).norm() / (1.0 + x.norm()));
        let moved = &x + s.basis_matrix() * vector(&mut rng, s.dim());
        optimal &= res.value() <= interpolant::seminorm(a, &moved)? + eq;
    }
    c.record("spline_matches_oracle", gap <= eq, gap);
    c.record("spline_optimal", optimal, 0.0);

    let sqrt_s = image(a.sqrt(), s, tol)?;
    let pm_half = ortho_projector(&sqrt_s);
    let mut r = Map::new();
    r.insert("compatible".into(), json!(rep.compatible));
    r.insert("chain".into(), chain_json(&rep));
    r.insert("pas".into(), matrix_json(p.matrix()));
    r.insert("pas_nullspace".into(), subspace_json(p.nullspace()));
    r.insert("degenerate".into(), subspace_json(&n_part));
    r.insert("sqrt_image_projector".into(), matrix_json(pm_half.matrix()));
    r.insert("rank_a".into(), json!(a.rank()));
    r.insert("dim_s".into(), json!(s.dim()));
    r.insert("samples_per_check".into(), json!(SAMPLES));
    let failed: Vec<Value> =
        c.0.iter()
            .filter(|(_, v)| v["pass"] == json!(false))
            .map(|(k, _)| json!(k))
            .collect();
    r.insert("failed".into(), Value::Array(failed));
    Ok((r, c.0))
}
