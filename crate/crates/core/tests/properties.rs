use proptest::prelude::*;

use robin_inverse::cli::{format_field, parse_field};
use robin_inverse::experiments::{apply_noise, NoiseSpec};
use robin_inverse::mesh::{boundary_inverse_param, boundary_param};
use robin_inverse::robin_basis::{c1_norm, RobinParameter};
use robin_inverse::sparse_linalg::{dense_solve, CsrMatrix, DenseMatrix};
use robin_inverse::{FemField, Mesh, SubdomainSpec};

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

proptest! {
    #[test]
    fn boundary_parametrization_round_trip(t in 0.0f64..4.0) {
        let p = boundary_param(t);
        let back = boundary_inverse_param(p).unwrap();
        // 0 and 4 name the same corner
        let d = (back - t).abs().min(4.0 - (back - t).abs());
        prop_assert!(d < 1e-12, "t = {t}, back = {back}");
    }

    #[test]
    fn robin_eval_is_linear(a in coeffs(6), b in coeffs(6), s in -3.0f64..3.0, t in 0.0f64..4.0) {
        let pa = RobinParameter::new(&a[..3], &a[3..]).unwrap();
        let pb = RobinParameter::new(&b[..3], &b[3..]).unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let pm = RobinParameter::new(&mix[..3], &mix[3..]).unwrap();
        let expect = pa.eval(t) + s * pb.eval(t);
        prop_assert!((pm.eval(t) - expect).abs() < 1e-11 * (1.0 + expect.abs()));
    }

    #[test]
    fn robin_eval_is_periodic(a in coeffs(7), t in 0.0f64..4.0) {
        let p = RobinParameter::new(&a[..4], &a[4..]).unwrap();
        prop_assert!((p.eval(t) - p.eval(t + 4.0)).abs() < 1e-11);
        prop_assert!((p.deriv(t) - p.deriv(t + 4.0)).abs() < 1e-10);
    }

    #[test]
    fn c1_norm_is_a_seminorm(a in coeffs(4), s in -4.0f64..4.0) {
        let p = RobinParameter::new(&a[..2], &a[2..]).unwrap();
        let scaled = p.with_coeffs(a.iter().map(|c| s * c).collect()).unwrap();
        let lhs = c1_norm(&scaled, 512);
        let rhs = s.abs() * c1_norm(&p, 512);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn dense_solve_residual(entries in coeffs(16), rhs in coeffs(4)) {
        // diagonally dominant, hence well conditioned
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| entries[4 * i + j] + if i == j { 25.0 } else { 0.0 }).collect())
            .collect();
        let m = DenseMatrix::from_rows(&rows);
        let x = dense_solve(&m, &rhs).unwrap();
        let r = m.mul_vec(&x);
        for (u, v) in r.iter().zip(&rhs) {
            prop_assert!((u - v).abs() < 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn csr_matvec_matches_dense(
        triplets in prop::collection::vec((0usize..6, 0usize..6, -2.0f64..2.0), 1..30),
        x in coeffs(6),
    ) {
        let csr = CsrMatrix::from_triplets(6, &triplets);
        let mut dense = [[0.0f64; 6]; 6];
        for &(i, j, v) in &triplets {
            dense[i][j] += v;
        }
        let y = csr.mul_vec(&x);
        for i in 0..6 {
            let e: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn field_file_round_trip_is_bitwise(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 16)) {
        let q = FemField::new(3, values).unwrap();
        let back = parse_field(&format_field(&q)).unwrap();
        for (a, b) in back.values().iter().zip(q.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn noise_is_linear_in_sigma(sigma in 0.0f64..1e-2) {
        let n = 20;
        let q = FemField::zeros(n);
        let unit = apply_noise(&q, &NoiseSpec::new(1.0, SubdomainSpec::reference()).unwrap());
        let scaled = apply_noise(&q, &NoiseSpec::new(sigma, SubdomainSpec::reference()).unwrap());
        for (u, s) in unit.values().iter().zip(scaled.values()) {
            prop_assert!((s - sigma * u).abs() <= 1e-15 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn locate_reproduces_point(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let m = Mesh::unit_square(7).unwrap();
        let (tri, bary) = m.locate([x, y]);
        prop_assert!(bary.iter().all(|&b| b >= -1e-12));
        prop_assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let v = m.triangle_vertices(tri);
        let px: f64 = (0..3).map(|k| bary[k] * v[k][0]).sum();
        let py: f64 = (0..3).map(|k| bary[k] * v[k][1]).sum();
        prop_assert!((px - x).abs() < 1e-12 && (py - y).abs() < 1e-12);
    }

    #[test]
    fn p1_fields_interpolate_linear_functions(a in -3.0f64..3.0, b in -3.0f64..3.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let m = Mesh::unit_square(5).unwrap();
        let f = |p: [f64; 2]| 1.0 + a * p[0] + b * p[1];
        let field = FemField::from_fn(&m, f);
        prop_assert!((field.eval([x, y]) - f([x, y])).abs() < 1e-12);
    }
}
