use adabfgs_core::data::{dataset_stats, parse_libsvm, SparseDataset};
use adabfgs_core::objective::{logistic_constants, weighted_norm, LogisticObjective, Objective, Vector};
use adabfgs_testkit::{fd_gradient, fd_hvp, random_quadratic, random_vector, rel_err, rng};
use rand::Rng;

fn random_dataset(m: usize, n: usize, seed: u64) -> SparseDataset {
    let mut r = rng(seed);
    let rows = (0..m)
        .map(|_| {
            let mut row = Vec::new();
            for j in 0..n {
                if r.gen_bool(0.4) {
                    row.push((j, r.gen_range(-2.0..2.0)));
                }
            }
            row
        })
        .collect();
    let labels = (0..m).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    SparseDataset::from_rows(n, rows, labels).unwrap()
}

fn mushrooms() -> SparseDataset {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mushrooms");
    parse_libsvm(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn objectives() -> Vec<Box<dyn Objective>> {
    let mut r = rng(11);
    vec![
        Box::new(random_quadratic(8, 50.0, &mut r)),
        Box::new(LogisticObjective::new(random_dataset(40, 8, 3)).unwrap()),
        Box::new(LogisticObjective::new(random_dataset(200, 15, 4)).unwrap()),
    ]
}

#[test]
fn gradient_matches_finite_differences() {
    let mut r = rng(21);
    for obj in objectives() {
        for _ in 0..20 {
            let x = random_vector(obj.dim(), &mut r) * 2.0;
            let g = obj.gradient(&x).unwrap();
            let err = rel_err(&g, &fd_gradient(obj.as_ref(), &x, 1e-6), 1e-8);
            assert!(err <= 1e-5, "gradient rel err {err:e}");
        }
    }
}

#[test]
fn hvp_matches_finite_differences() {
    let mut r = rng(22);
    for obj in objectives() {
        for _ in 0..50 {
            let x = random_vector(obj.dim(), &mut r);
            let v = random_vector(obj.dim(), &mut r);
            let hv = obj.hvp(&x, &v).unwrap();
            let err = rel_err(&hv, &fd_hvp(obj.as_ref(), &x, &v, 1e-5), 1e-8);
            assert!(err <= 1e-4, "hvp rel err {err:e}");
        }
    }
}

#[test]
fn value_and_gradient_agree_with_separate_calls() {
    let mut r = rng(23);
    for obj in objectives() {
        let x = random_vector(obj.dim(), &mut r);
        let (f, g) = obj.value_and_gradient(&x).unwrap();
        assert!((f - obj.value(&x).unwrap()).abs() <= 1e-14 * (1.0 + f.abs()));
        assert!((g - obj.gradient(&x).unwrap()).norm() <= 1e-14);
    }
}

#[test]
fn curvature_sandwich() {
    let mut r = rng(24);
    for obj in objectives() {
        let c = obj.constants();
        for _ in 0..30 {
            let x = random_vector(obj.dim(), &mut r) * 3.0;
            let d = random_vector(obj.dim(), &mut r);
            let q = d.dot(&obj.hvp(&x, &d).unwrap());
            let dd = d.norm_squared();
            assert!(q >= c.mu * dd * (1.0 - 1e-10), "{q} < μ‖d‖²");
            assert!(q <= c.l * dd * (1.0 + 1e-10), "{q} > L‖d‖²");
        }
    }
}

#[test]
fn midpoint_strict_convexity() {
    let mut r = rng(25);
    for obj in objectives() {
        for _ in 0..30 {
            let a = random_vector(obj.dim(), &mut r);
            let b = random_vector(obj.dim(), &mut r);
            let mid = (&a + &b) * 0.5;
            let lhs = obj.value(&mid).unwrap();
            let rhs = 0.5 * (obj.value(&a).unwrap() + obj.value(&b).unwrap());
            assert!(lhs < rhs);
        }
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    for obj in objectives() {
        let x = Vector::zeros(obj.dim() + 1);
        assert!(obj.value(&x).is_err());
        assert!(obj.gradient(&x).is_err());
        assert!(obj.hvp(&x, &x).is_err());
    }
}

#[test]
fn logistic_value_at_origin_is_ln2_for_any_dataset() {
    let f = LogisticObjective::new(random_dataset(30, 5, 9)).unwrap();
    assert!((f.value(&Vector::zeros(5)).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn mushrooms_constants_and_weighted_norm_sandwich() {
    let ds = mushrooms();
    assert_eq!((ds.n_samples(), ds.n_features()), (8124, 112));
    let f = LogisticObjective::new(ds.clone()).unwrap();
    let c = f.constants();
    assert!(c.mu > 0.0 && c.l.is_finite() && c.m.is_finite() && c.kappa() > 1.0);

    let stats = dataset_stats(&ds);
    assert!(stats.gram.converged);
    let m = ds.n_samples() as f64;
    let l = stats.gram.lambda / (4.0 * m) + 1.0 / m;
    assert_eq!(l.to_bits(), logistic_constants(&ds).unwrap().0.l.to_bits());
    assert_eq!(l.to_bits(), c.l.to_bits());

    let x0 = Vector::from_element(112, 1.0);
    let mut r = rng(5);
    for _ in 0..5 {
        let d = random_vector(112, &mut r);
        let w = weighted_norm(&f, &x0, &d).unwrap();
        assert!(w >= c.mu.sqrt() * d.norm() && w <= c.l.sqrt() * d.norm());
    }
}
