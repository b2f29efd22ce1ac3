use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszlab_core::builders::{build, BuilderSpec};
use rieszlab_core::functionals::{t2_norm, TentField};
use rieszlab_core::hardy::*;
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::vecops::project_mean_zero;

fn random_mean_zero(n: usize, m: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_mean_zero(&mut f, m);
    f
}

#[test]
fn tent_round_trip_on_random_fields() {
    let s = build(&BuilderSpec::sierpinski(3)).unwrap();
    let table = s.rho_table();
    let n = s.vertex_count();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n * 8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = TentField::from_values(n, 8, values).unwrap();
        let d = tent_atomic_decompose(&s, &table, &field).unwrap();
        assert!(d.residual <= 1e-8 * t2_norm(&s, &field).unwrap());
        for atom in &d.atoms {
            assert!(check_tent_atom(&s, &table, atom).is_valid());
        }
        println!("seed {seed}: {} atoms, efficiency {}", d.atoms.len(), d.efficiency());
    }
}

#[test]
fn molecular_pipelines_reconstruct() {
    let s = build(&BuilderSpec::sierpinski(3)).unwrap();
    let table = s.rho_table();
    let sd = SpectralDecomposition::new(s.graph()).unwrap();
    let d0 = estimate_doubling_exponent(&s).unwrap();
    for beta in [0.5, 1.0] {
        let mut opts = MolecularOptions::new(beta, 1.0, 1e-6);
        opts.doubling_exponent = Some(d0);
        let f = random_mean_zero(s.vertex_count(), s.measure(), 7);
        let dec = molecular_decompose(&s, &table, &sd, &f, &opts).unwrap();
        println!(
            "beta {beta}: d0 {d0} eta {} K {} molecules {} residual {} closed {} maxC {} sum {} maxl1 {}",
            dec.eta, dec.k_max, dec.molecules.len(), dec.relative_residual, dec.closed_loop_error,
            dec.max_normalization, dec.lambda_sum(), dec.max_l1(&s)
        );
        assert!(dec.relative_residual <= 1e-6);
        for mol in &dec.molecules {
            assert!(check_molecule(&s, mol).is_valid());
        }
        let form = riesz_hardy_map(&s, &table, &sd, &f, &opts).unwrap();
        println!(
            "form: molecules {} residual {} closed {} sum {} ratio {}",
            form.molecules.len(), form.relative_residual, form.closed_loop_error, form.lambda_sum(),
            form.lambda_sum() / dec.lambda_sum()
        );
        assert!(form.relative_residual <= 1e-6);
    }
}

#[test]
fn lazy_k2_riesz_map_is_one_molecule() {
    let s = build(&BuilderSpec::path(2)).unwrap();
    let table = s.rho_table();
    let sd = SpectralDecomposition::new(s.graph()).unwrap();
    let opts = MolecularOptions::new(0.5, 1.0, 1e-10);
    let dec = riesz_hardy_map(&s, &table, &sd, &[1.0, -1.0], &opts).unwrap();
    assert_eq!(dec.molecules.len(), 1);
    assert_eq!(dec.k_max, 1);
    assert!(dec.relative_residual < 1e-12);
}

#[test]
fn synthesis_inverts_lp_transform() {
    use rieszlab_core::calculus::Calculus;
    use rieszlab_core::functionals::lp_transform;
    let s = build(&BuilderSpec::sierpinski(3)).unwrap();
    let g = s.graph();
    let sd = SpectralDecomposition::new(g).unwrap();
    let ev = sd.eigenvalues();
    let z = ev[1].abs().max(ev[ev.len() - 1].abs()).powi(2);
    for (beta, eta) in [(0.5, 3), (1.0, 4)] {
        let k = synthesis_k_max(eta, z, 1e-7).unwrap();
        for seed in 0..5 {
            let f = random_mean_zero(s.vertex_count(), s.measure(), seed);
            let field = lp_transform(g, &Calculus::Spectral(&sd), beta, &f, k).unwrap();
            let back = pi_synthesis(g, &sd, eta, beta, &field).unwrap();
            let err: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-6, "beta {beta} seed {seed}: {err}");
        }
    }
}

#[test]
fn eigenfunction_is_reconstructed() {
    let s = build(&BuilderSpec::sierpinski(3)).unwrap();
    let table = s.rho_table();
    let sd = SpectralDecomposition::new(s.graph()).unwrap();
    let opts = MolecularOptions::new(1.0, 1.0, 1e-6);
    for i in [1, 5, 20] {
        let e = sd.eigenfunction(i);
        let dec = molecular_decompose(&s, &table, &sd, &e, &opts).unwrap();
        assert!(dec.relative_residual <= 1e-6);
    }
}
