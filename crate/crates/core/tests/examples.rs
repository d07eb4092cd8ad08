//! Worked examples for every operation, each checked against an independent
//! computation.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voronoi_core::lattice::{direct_sum, is_sublattice, quotient_order, standard_lattice, Lattice};
use voronoi_core::matrix::{det, hnf_lower_triangular, IntMatrix};
use voronoi_core::quantize::{
    fold_mod_lattice, fold_mod_parallelotope, quantize_direct_sum, quantize_scaled, short_vectors, Quantizer,
};
use voronoi_core::shaping::{Message, VoronoiCodeSpec};
use voronoi_core::simulate::{
    average_energy, average_energy_sampled, decode_lattice, transmit, wer_sweep, ChannelConfig, DecodeMode, SweepConfig,
};

fn cols(c: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_columns(c)
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Determinant by cofactor expansion, for tiny matrices.
fn det_cofactor(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det_cofactor(&minor)
        })
        .sum()
}

/// Whether `v` is an integer combination of the columns of `g` (Cramer).
fn in_span(g: &[Vec<i128>], v: &[i128]) -> bool {
    let d = det_cofactor(g);
    (0..g.len()).all(|j| {
        let mut m = g.to_vec();
        for (row, &x) in m.iter_mut().zip(v) {
            row[j] = x;
        }
        det_cofactor(&m) % d == 0
    })
}

fn rows_i128(m: &IntMatrix) -> Vec<Vec<i128>> {
    m.to_i64_rows().unwrap().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect()
}

fn column(m: &[Vec<i128>], j: usize) -> Vec<i128> {
    m.iter().map(|r| r[j]).collect()
}

fn same_span(a: &IntMatrix, b: &IntMatrix) -> bool {
    let (ra, rb) = (rows_i128(a), rows_i128(b));
    let n = ra.len();
    (0..n).all(|j| in_span(&ra, &column(&rb, j))) && (0..n).all(|j| in_span(&rb, &column(&ra, j)))
}

#[test]
fn hnf_of_two_by_two() {
    let g = cols(&[&[1, 3], &[2, 4]]);
    let l = hnf_lower_triangular(&g).unwrap();
    assert_eq!(l, IntMatrix::from_rows(&[[1, 0], [1, 2]]));
    assert!(same_span(&g, &l));
}

#[test]
fn hnf_fixed_points() {
    assert_eq!(hnf_lower_triangular(&IntMatrix::identity(8)).unwrap(), IntMatrix::identity(8));
    assert_eq!(hnf_lower_triangular(&IntMatrix::diagonal(&[2, 2])).unwrap(), IntMatrix::diagonal(&[2, 2]));
    let err = hnf_lower_triangular(&cols(&[&[1, 2], &[2, 4]])).unwrap_err();
    assert_eq!(err.to_string(), "degenerate lattice");
}

#[test]
fn determinant_examples() {
    assert_eq!(det(&IntMatrix::identity(4)).unwrap(), big(1));
    assert_eq!(det(&IntMatrix::from_rows(&[[1, 2], [3, 4]])).unwrap(), big(-2));
    let e8 = standard_lattice("E8_int").unwrap();
    let d = det(e8.generator()).unwrap();
    assert_eq!(d.magnitude(), &num_bigint::BigUint::from(256u32));
    assert_eq!(det_cofactor(&rows_i128(e8.generator())).abs(), 256);
}

#[test]
fn sublattice_examples() {
    let z = |n: usize, k: u64| standard_lattice(&format!("Zn({n})")).unwrap().scaled(k);
    assert!(is_sublattice(&z(3, 2), &z(3, 1)).unwrap());
    assert!(!is_sublattice(&z(3, 1), &z(3, 2)).unwrap());
    let e8 = standard_lattice("E8_int").unwrap();
    assert!(is_sublattice(&e8.scaled(8), &z(8, 4)).unwrap());
    // Independent check: every generator entry of 8 E8_int is divisible by 4.
    let g = e8.scaled(8).generator().to_i64_rows().unwrap();
    assert!(g.iter().flatten().all(|v| v % 4 == 0));
    assert!(is_sublattice(&z(2, 1), &z(3, 1)).is_err());
}

#[test]
fn quotient_order_examples() {
    let z2 = standard_lattice("Zn(2)").unwrap();
    assert_eq!(quotient_order(&z2, &z2.scaled(2)).unwrap(), big(4));
    let skew = Lattice::new(IntMatrix::from_rows(&[[1, 0], [1, 2]])).unwrap();
    assert_eq!(quotient_order(&z2, &skew).unwrap(), big(2));
    // Brute force: classes of a 4x4 box of Z^2 modulo the lattice.
    let mut reps: Vec<[i64; 2]> = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            if !reps.iter().any(|r| skew.contains(&[a - r[0], b - r[1]])) {
                reps.push([a, b]);
            }
        }
    }
    assert_eq!(reps.len(), 2);
    let desk = VoronoiCodeSpec::builtin("desk-e8").unwrap();
    assert_eq!(desk.shaping_lattice().volume(), &(big(4).pow(8) * big(2).pow(8)));
    assert_eq!(desk.coding_lattice().volume(), &big(2).pow(8));
    assert_eq!(quotient_order(desk.coding_lattice(), desk.shaping_lattice()).unwrap(), big(65536));
    assert!(quotient_order(&skew, &z2).is_err());
}

#[test]
fn direct_sum_examples() {
    let z1 = standard_lattice("Zn(1)").unwrap();
    let d = direct_sum(&z1, 8, 2).unwrap();
    assert_eq!(d.generator(), &IntMatrix::diagonal(&[2; 8]));
    let e8 = standard_lattice("E8_int").unwrap();
    let big_sum = direct_sum(&e8, 16, 4).unwrap();
    assert_eq!(big_sum.dim(), 128);
    assert_eq!(big_sum.volume(), &(big(4).pow(8) * big(256)).pow(16));
    let leech = standard_lattice("Leech_int").unwrap();
    assert_eq!(direct_sum(&leech, 1, 1).unwrap().generator(), leech.generator());
}

#[test]
fn standard_lattice_examples() {
    assert_eq!(standard_lattice("Zn(3)").unwrap().generator(), &IntMatrix::identity(3));
    let e8 = standard_lattice("E8_int").unwrap();
    let short = short_vectors(&e8, 8.0).unwrap();
    assert_eq!(short.len(), 240);
    assert!(short.iter().all(|v| v.iter().map(|x| x * x).sum::<i64>() == 8));
    let leech = standard_lattice("Leech_int").unwrap();
    assert_eq!(leech.volume(), &big(2).pow(36));
    // Sampled short vectors: random small combinations never go below 32.
    let g = leech.generator().to_i64_rows().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let b: Vec<i64> = (0..24).map(|_| rng.gen_range(-1..=1)).collect();
        let v: Vec<i64> = (0..24).map(|i| (0..24).map(|j| g[i][j] * b[j]).sum()).collect();
        let n2: i64 = v.iter().map(|x| x * x).sum();
        assert!(n2 == 0 || n2 >= 32);
    }
    assert!(standard_lattice("A2").is_err());
}

#[test]
fn quantizer_examples() {
    let zn = Quantizer::for_lattice(&standard_lattice("Zn(2)").unwrap()).unwrap();
    assert_eq!(zn.quantize(&[0.4, -1.2]), vec![0, -1]);
    let z1 = Quantizer::for_lattice(&standard_lattice("Zn(2)").unwrap()).unwrap();
    assert_eq!(quantize_scaled(&z1, 4.0, &[3.0, 3.0]).unwrap(), vec![4.0, 4.0]);
    let e8 = Quantizer::for_lattice(&standard_lattice("E8_int").unwrap()).unwrap();
    assert_eq!(quantize_scaled(&e8, 2.0, &[0.0; 8]).unwrap(), vec![0.0; 8]);
    assert_eq!(quantize_direct_sum(&zn, 2, &[0.4, -1.2, 2.6, 0.0]).unwrap(), vec![0, -1, 3, 0]);
    assert_eq!(quantize_direct_sum(&zn, 1, &[0.4, -1.2]).unwrap(), zn.quantize(&[0.4, -1.2]));
    assert!(quantize_direct_sum(&zn, 2, &[0.0; 3]).is_err());
}

#[test]
fn scaled_e8_matches_enumeration() {
    let l = standard_lattice("E8_int").unwrap().scaled(8);
    let fast = Quantizer::for_lattice(&l).unwrap();
    let exact = Quantizer::exact(&l).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-64.0..64.0)).collect();
        assert_eq!(fast.quantize(&y), exact.quantize(&y));
    }
}

#[test]
fn direct_sum_of_scaled_e8_is_blockwise() {
    let block = standard_lattice("E8_int").unwrap().scaled(8);
    let inner = Quantizer::exact(&block).unwrap();
    let sum = Quantizer::for_lattice(&direct_sum(&block, 16, 1).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let y: Vec<f64> = (0..128).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let got = sum.quantize(&y);
        for (yb, gb) in y.chunks(8).zip(got.chunks(8)) {
            assert_eq!(inner.quantize(yb), gb);
        }
    }
}

#[test]
fn fold_examples() {
    let four_z2 = Quantizer::for_lattice(&standard_lattice("Zn(2)").unwrap().scaled(4)).unwrap();
    assert_eq!(fold_mod_lattice(&four_z2, &[3.0, 3.0]), vec![-1.0, -1.0]);
    assert_eq!(fold_mod_lattice(&four_z2, &[0.0, 0.0]), vec![0.0, 0.0]);
    let l = standard_lattice("E8_int").unwrap().scaled(8);
    let q = Quantizer::for_lattice(&l).unwrap();
    let shorts = short_vectors(&l, 2.0 * 64.0 * 8.0).unwrap();
    assert_eq!(shorts.len(), 240 + 2160);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-200.0..200.0)).collect();
        let f = fold_mod_lattice(&q, &x);
        let n0: f64 = f.iter().map(|v| v * v).sum();
        for s in &shorts {
            let n1: f64 = f.iter().zip(s).map(|(a, &b)| (a - b as f64).powi(2)).sum();
            assert!(n0 <= n1 + 1e-9);
        }
    }
}

#[test]
fn parallelotope_examples() {
    assert_eq!(fold_mod_parallelotope(&IntMatrix::diagonal(&[2, 2]), &[5, -1]).unwrap(), vec![1, 1]);
    let l = IntMatrix::from_rows(&[[1, 0], [1, 2]]);
    let r = fold_mod_parallelotope(&l, &[3, 4]).unwrap();
    assert_eq!(r, vec![0, 1]);
    let skew = Lattice::new(l.clone()).unwrap();
    assert!(skew.contains(&[3 - r[0], 4 - r[1]]));
    assert_eq!(fold_mod_parallelotope(&l, &[0, 1]).unwrap(), vec![0, 1]);
}

#[test]
fn second_moment_of_the_cube() {
    for n in [1, 3] {
        let q = Quantizer::for_lattice(&standard_lattice(&format!("Zn({n})")).unwrap()).unwrap();
        let r = voronoi_core::quantize::second_moment_mc(&q, 100_000, 1).unwrap();
        assert!((r.nsm - 1.0 / 12.0).abs() < 4.0 * r.stderr, "{r:?}");
    }
}

#[test]
fn shaping_gains_are_ordered() {
    let gain = |name: &str, samples| {
        let q = Quantizer::for_lattice(&standard_lattice(name).unwrap()).unwrap();
        voronoi_core::quantize::second_moment_mc(&q, samples, 3).unwrap()
    };
    let cube = gain("Zn(8)", 50_000);
    let e8 = gain("E8_int", 50_000);
    let leech = gain("Leech_int", 3_000);
    assert!(cube.gain_db().abs() < 4.0 * cube.gain_stderr_db());
    assert!(e8.gain_db() > cube.gain_db() + 0.5);
    assert!(leech.gain_db() > e8.gain_db() + 0.2, "{} vs {}", leech.gain_db(), e8.gain_db());
}

#[test]
fn average_energy_examples() {
    let pam4 = VoronoiCodeSpec::new(
        voronoi_core::codes::CodeChain::empty(2, 1).unwrap(),
        standard_lattice("Zn(1)").unwrap(),
        4,
        1,
    )
    .unwrap();
    // Constellation with the lexicographic tie rule is {-1, 0, 1, 2}.
    let pts: Vec<i64> = pam4.constellation(10).unwrap().into_iter().flatten().collect();
    assert_eq!(pts.iter().map(|x| x * x).sum::<i64>() as f64 / 4.0, 1.5);
    assert_eq!(average_energy(&pam4).unwrap().per_dim, 1.5);
}

#[test]
fn energy_by_enumeration_matches_sampling() {
    for name in ["desk-e8", "desk-cubic"] {
        let spec = VoronoiCodeSpec::builtin(name).unwrap();
        let exact = average_energy(&spec).unwrap();
        let sampled = average_energy_sampled(&spec, 100_000, 7).unwrap();
        assert!((exact.per_dim - sampled.per_dim).abs() < 3.0 * sampled.stderr, "{name}: {exact:?} {sampled:?}");
    }
}

#[test]
fn transmit_noise_statistics() {
    let cfg = ChannelConfig::new(0.7, 5, 1).unwrap();
    let x = vec![0i64; 10];
    let mut s2 = 0.0;
    let draws = 10_000u64;
    for t in 0..draws {
        s2 += transmit(&x, &cfg, t).iter().map(|v| v * v).sum::<f64>();
    }
    let var = s2 / (10 * draws) as f64;
    assert!((var / 0.49 - 1.0).abs() < 0.02, "{var}");
    assert_eq!(transmit(&[3, -2], &cfg, 17), transmit(&[3, -2], &cfg, 17));
    let tiny = ChannelConfig::new(1e-9, 5, 1).unwrap();
    let y = transmit(&[3, -2], &tiny, 0);
    assert!((y[0] - 3.0).abs() < 6e-9 && (y[1] + 2.0).abs() < 6e-9);
    assert!(ChannelConfig::new(0.0, 1, 1).is_err());
}

#[test]
fn decoding_without_noise_and_with_little_noise() {
    let spec = VoronoiCodeSpec::builtin("desk-e8").unwrap();
    let cfg = ChannelConfig::new(0.01, 3, 1000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 0..cfg.trials as u64 {
        let x = spec.encode(&spec.random_message(&mut rng)).unwrap();
        let y = transmit(&x, &cfg, t);
        for mode in [DecodeMode::ExhaustiveMl, DecodeMode::Multistage] {
            assert_eq!(decode_lattice(&spec, &y, mode).unwrap(), x);
        }
    }
    let leech = VoronoiCodeSpec::builtin("leech").unwrap();
    assert!(decode_lattice(&leech, &[0.0; 24], DecodeMode::ExhaustiveMl).is_err());
}

#[test]
fn multistage_is_no_better_than_ml_and_within_twice() {
    let spec = VoronoiCodeSpec::builtin("rep2").unwrap();
    let cfg = |mode| SweepConfig { seed: 12, max_trials: 10_000, max_errors: u64::MAX, mode };
    let ml = wer_sweep(&spec, &[6.0], &cfg(DecodeMode::ExhaustiveMl)).unwrap()[0];
    let ms = wer_sweep(&spec, &[6.0], &cfg(DecodeMode::Multistage)).unwrap()[0];
    assert_eq!(ml.trials, 10_000);
    assert!(ms.errors >= ml.errors, "{ms:?} {ml:?}");
    assert!(ms.wer <= 2.0 * ml.wer, "{ms:?} {ml:?}");
}

#[test]
fn wer_limits() {
    let spec = VoronoiCodeSpec::builtin("rep2").unwrap();
    let cfg = SweepConfig { seed: 1, max_trials: 20_000, max_errors: u64::MAX, mode: DecodeMode::ExhaustiveMl };
    let pts = wer_sweep(&spec, &[-40.0, 40.0], &cfg).unwrap();
    let guess = 1.0 - 1.0 / 8.0;
    assert!((pts[0].wer - guess).abs() < 4.0 * (guess * (1.0 - guess) / 20_000f64).sqrt(), "{:?}", pts[0]);
    assert_eq!(pts[1].errors, 0);
    assert!(pts[0].ci_low <= pts[0].wer && pts[0].wer <= pts[0].ci_high);
    assert_eq!(pts[0].wer, pts[0].errors as f64 / pts[0].trials as f64);
}

#[test]
fn sweeps_are_reproducible() {
    let spec = VoronoiCodeSpec::builtin("desk-e8").unwrap();
    let cfg = SweepConfig::new(21, 3000, DecodeMode::Multistage);
    let a = wer_sweep(&spec, &[8.0, 10.0], &cfg).unwrap();
    let b = wer_sweep(&spec, &[8.0, 10.0], &cfg).unwrap();
    assert_eq!(a, b);
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    voronoi_core::simulate::write_csv(&mut out_a, &["x".into()], &a).unwrap();
    voronoi_core::simulate::write_csv(&mut out_b, &["x".into()], &b).unwrap();
    assert_eq!(out_a, out_b);
}

#[test]
fn coset_completeness_on_the_two_dim_system() {
    let spec = VoronoiCodeSpec::builtin("rep2").unwrap();
    let reps: Vec<Vec<i64>> = (0..8).map(|i| spec.coset_representative(&spec.message_from_index(i)).unwrap()).collect();
    for p in spec.enumerate_constellation_oracle().unwrap() {
        let hits = reps.iter().filter(|r| spec.shaping_lattice().contains(&[p[0] - r[0], p[1] - r[1]])).count();
        assert_eq!(hits, 1, "{p:?}");
    }
    let m = Message { u: vec![vec![1]], s: vec![1, 1] };
    assert_eq!(spec.encode(&m).unwrap(), vec![-1, -1]);
}
