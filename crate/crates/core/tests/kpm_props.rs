use hofstadter::kpm::{density_of_states, estimate_bounds, moments, reconstruct_dos, KpmParams};
use hofstadter::magnetic::{assemble, SparseHermitian};
use hofstadter::oracle::exact_eigenvalues;
use hofstadter::plaquette::FluxQuantum;
use hofstadter::structure::{build_flake, honeycomb, OnsiteEnergies};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, seed: u64) -> SparseHermitian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        d[i * n + i] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / (n as f64).sqrt();
            d[i * n + j] = v;
            d[j * n + i] = v.conj();
        }
    }
    SparseHermitian::from_dense(n, &d).unwrap()
}

fn graphene_flake_h() -> SparseHermitian {
    let flake = build_flake(&honeycomb(1.42).lattice, 12, 12).unwrap();
    assemble(&flake, &OnsiteEnergies::default(), 3.0e4, FluxQuantum::HOverE).unwrap()
}

#[test]
fn moments_are_bit_identical_for_a_seed() {
    let h = graphene_flake_h();
    let params = KpmParams {
        num_moments: 256,
        num_random_vectors: 4,
        rng_seed: 11,
        ..KpmParams::default()
    };
    let bounds = estimate_bounds(&h, params.rescale_margin, params.rng_seed).unwrap();
    let a = moments(&h, &bounds, &params).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| moments(&h, &bounds, &params).unwrap());
    assert!(a
        .iter()
        .zip(&b)
        .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
}

#[test]
fn density_is_nonnegative_and_normalized() {
    let h = graphene_flake_h();
    let (dos, bounds) = density_of_states(&h, &KpmParams::default()).unwrap();
    assert!(dos.density.iter().all(|&v| v >= -1e-12));
    assert!((dos.integral() / h.dim() as f64 - 1.0).abs() < 0.01);
    let eig = exact_eigenvalues(&h).unwrap();
    assert!(bounds.e_min <= eig[0] && bounds.e_max >= eig[eig.len() - 1]);
}

#[test]
fn more_random_vectors_reduce_error() {
    let n = 120;
    let m = 128;
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        let h = random_hermitian(n, 40 + seed);
        let base = KpmParams {
            num_moments: m,
            energy_points: 1024,
            rng_seed: seed,
            ..KpmParams::default()
        };
        let bounds = estimate_bounds(&h, base.rescale_margin, seed).unwrap();
        let (shift, scale) = bounds.rescaling(base.rescale_margin);
        let eig = exact_eigenvalues(&h).unwrap();
        let exact: Vec<Complex64> = (0..m)
            .map(|k| {
                let s: f64 = eig
                    .iter()
                    .map(|e| (k as f64 * ((e - shift) / scale).acos()).cos())
                    .sum();
                Complex64::new(s, 0.0)
            })
            .collect();
        let reference = reconstruct_dos(&exact, &bounds, &base).unwrap();
        let err = |r: usize| {
            let p = KpmParams {
                num_random_vectors: r,
                ..base
            };
            let mu = moments(&h, &bounds, &p).unwrap();
            reconstruct_dos(&mu, &bounds, &p).unwrap().l1_distance(&reference)
        };
        ratios.push(err(16) / err(4));
    }
    ratios.sort_by(f64::total_cmp);
    assert!(ratios[2] < 0.65, "median ratio {}", ratios[2]);
}
