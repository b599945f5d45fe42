use nppac::anisotropy::AnisotropyParams;
use nppac::diagnostics;
use nppac::fem::{self, assemble_mass, assemble_stiffness_scalar, assemble_stiffness_tensor, Field};
use nppac::io::config;
use nppac::linsolve::{bicgstab, cg, SolverOptions};
use nppac::{CsrMatrix, Mesh, Params};
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    (1usize..6, 1usize..6, 0.5f64..3.0, 0.5f64..3.0)
        .prop_map(|(nx, ny, l1, l2)| Mesh::build_rectangle(l1, l2, nx, ny).unwrap())
}

fn mesh_and_field() -> impl Strategy<Value = (Mesh, Vec<f64>)> {
    mesh_strategy().prop_flat_map(|m| {
        let n = m.num_nodes();
        (Just(m), prop::collection::vec(-1.0f64..2.0, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mesh_counts_and_area((mesh, _) in mesh_and_field()) {
        prop_assert_eq!(mesh.num_nodes(), (mesh.nx() + 1) * (mesh.ny() + 1));
        prop_assert_eq!(mesh.num_triangles(), 2 * mesh.nx() * mesh.ny());
        prop_assert!((mesh.total_area() - mesh.l1() * mesh.l2()).abs() < 1e-12 * mesh.l1() * mesh.l2());
        prop_assert!(mesh.geometries().iter().all(|g| g.area > 0.0));
    }

    #[test]
    fn stiffness_rows_sum_to_zero((mesh, w) in mesh_and_field(), delta in 0.0f64..0.1) {
        let coeff: Vec<f64> = w.iter().map(|v| 1.0 + v * v).collect();
        let k = assemble_stiffness_scalar(&mesh, &coeff).unwrap();
        prop_assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12));
        prop_assert!(k.is_symmetric(1e-12));
        let a = AnisotropyParams { delta, ..AnisotropyParams::default() };
        let kt = assemble_stiffness_tensor(&mesh, &w, &a).unwrap();
        let scale = kt.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(kt.row_sums().iter().all(|s| s.abs() <= 1e-12 * scale.max(1.0)));
    }

    #[test]
    fn isotropic_tensor_is_scaled_laplacian((mesh, w) in mesh_and_field(), a0 in 0.05f64..2.0) {
        let a = AnisotropyParams { a0, delta: 0.0, ..AnisotropyParams::default() };
        let kt = assemble_stiffness_tensor(&mesh, &w, &a).unwrap();
        let ks = assemble_stiffness_scalar(&mesh, &vec![a0 * a0; mesh.num_nodes()]).unwrap();
        for (x, y) in kt.values().iter().zip(ks.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn masses_are_nonnegative_and_consistent((mesh, w) in mesh_and_field()) {
        let m = assemble_mass(&mesh, false);
        prop_assert!(m.values().iter().all(|&v| v >= 0.0));
        let lumped = fem::lumped_mass(&mesh);
        for (a, b) in m.row_sums().iter().zip(&lumped) {
            prop_assert!((a - b).abs() < 1e-14);
        }
        let ones = vec![1.0; mesh.num_nodes()];
        prop_assert!((m.bilinear(&ones, &ones) - mesh.total_area()).abs() < 1e-12);
        let l2 = fem::l2_norm(&mesh, &w).unwrap();
        prop_assert!((l2 * l2 - m.bilinear(&w, &w)).abs() < 1e-10 * (1.0 + l2 * l2));
    }

    #[test]
    fn dirichlet_elimination_keeps_symmetry((mesh, w) in mesh_and_field()) {
        let coeff: Vec<f64> = w.iter().map(|v| 1.0 + v.abs()).collect();
        let mut k = assemble_stiffness_scalar(&mesh, &coeff).unwrap();
        let mut b = w.clone();
        let nodes = mesh.dirichlet_nodes();
        let vals: Vec<f64> = nodes.iter().map(|&i| w[i]).collect();
        fem::apply_dirichlet(&mut k, &mut b, &nodes, &vals).unwrap();
        prop_assert!(k.is_symmetric(1e-14));
        for (&i, &v) in nodes.iter().zip(&vals) {
            prop_assert_eq!(b[i], v);
            prop_assert_eq!(k.get(i, i), 1.0);
        }
    }

    #[test]
    fn cg_and_bicgstab_agree_on_spd(n in 2usize..30, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0 + rng.gen_range(0.0..1.0)));
            if i + 1 < n {
                let off = rng.gen_range(-1.0..1.0);
                trip.push((i, i + 1, off));
                trip.push((i + 1, i, off));
            }
        }
        let a = CsrMatrix::from_triplets(n, trip).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let opts = SolverOptions::with_tol(1e-12);
        let (x, r1) = cg(&a, &b, &vec![0.0; n], &opts).unwrap();
        let (y, r2) = bicgstab(&a, &b, &vec![0.0; n], &opts).unwrap();
        prop_assert!(r1.converged && r2.converged);
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn telescoping_is_exact_and_homogeneous(
        pair in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, 0.01f64..1.0), 1..60),
        tau in 1e-5f64..1.0,
        scale in 0.1f64..100.0,
    ) {
        let a: Vec<f64> = pair.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pair.iter().map(|p| p.1).collect();
        let m: Vec<f64> = pair.iter().map(|p| p.2).collect();
        let r = diagnostics::telescoping_check(&a, &b, &m, tau).unwrap();
        let s = diagnostics::telescoping_scale(&a, &b, &m, tau);
        prop_assert!(r <= 1e-12 * s.max(1e-300));
        let sa: Vec<f64> = a.iter().map(|v| scale * v).collect();
        let sb: Vec<f64> = b.iter().map(|v| scale * v).collect();
        let rs = diagnostics::telescoping_check(&sa, &sb, &m, tau).unwrap();
        prop_assert!(rs <= 1e-12 * diagnostics::telescoping_scale(&sa, &sb, &m, tau).max(1e-300));
    }

    #[test]
    fn fourier_recovers_single_cosine(n in 1usize..7, amp in 0.0f64..0.5, phase in 0.0f64..6.28) {
        let rays = 360;
        let r: Vec<f64> = (0..rays)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / rays as f64;
                1.0 + amp * (n as f64 * th + phase).cos()
            })
            .collect();
        let modes = diagnostics::fourier_amplitudes(&r, 6);
        prop_assert!((modes[0] - 1.0).abs() < 1e-12);
        for (m, &v) in modes.iter().enumerate().skip(1) {
            let expect = if m == n { amp } else { 0.0 };
            prop_assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn config_round_trip(
        nx in 1usize..300,
        delta in 0.0f64..0.2,
        mu in -3.0f64..3.0,
        tau in 1e-6f64..1e-2,
        half in any::<bool>(),
        plus in any::<bool>(),
        eps in 0.01f64..2.0,
    ) {
        let mut p = Params { nx, half_domain: half, ..Params::default() };
        p.aniso.delta = delta;
        p.material.mu = mu;
        p.material.eps = eps;
        p.scheme.tau = tau;
        if plus {
            p.scheme.forcing_sign = nppac::ForcingSign::Plus;
        }
        let text = config::serialize_config(&p);
        let q = config::parse_config(&text).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(config::serialize_config(&q), text);
    }

    #[test]
    fn max_principle_bound_scales_as_inverse_gamma((mesh, _) in mesh_and_field(), gamma in 0.1f64..10.0) {
        let bound = |g: f64| {
            let mut p = Params::default();
            p.material.gamma = g;
            p.material.c1 = 1.0;
            p.material.c2 = 1.0;
            let s = nppac::Stepper::with_mesh(mesh.clone(), p).unwrap();
            let u = Field::from_fn(&mesh, |x, y| 0.2 + 0.3 * (x * y).sin().abs());
            let c = Field::constant(&mesh, 1.0);
            let phi_bar = Field::constant(&mesh, 0.0);
            s.max_principle_tau_bound(&nppac::State { u, c, phi_bar, t: 0.0, k: 0 })
        };
        let (b1, bg) = (bound(1.0), bound(gamma));
        prop_assert!((bg * gamma - b1).abs() <= 1e-12 * b1);
    }
}
