//! Literal-loop reference implementations checked against the library.

#![allow(clippy::needless_range_loop)]

use ndarray::Array2;
use pflicm::clustering::objective;
use pflicm::features::glcm::Glcm;
use pflicm::features::extract;
use pflicm::validity::{vxb, xb};
use pflicm::{Algorithm, FeatureMatrix, FeatureSpec, Partition, Raster, SolverConfig, SpatialGraph};
use proptest::prelude::*;

fn gray_level(v: f64, levels: usize) -> usize {
    let mut g = 0;
    while g + 1 < levels && v >= (g + 1) as f64 / levels as f64 {
        g += 1;
    }
    g
}

/// Co-occurrence counts from a double loop over every ordered pixel pair.
fn glcm_oracle(
    gray: &[usize],
    valid: &[bool],
    w: usize,
    h: usize,
    offset: (isize, isize),
    levels: usize,
) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; levels]; levels];
    for p in 0..w * h {
        for q in 0..w * h {
            let (pr, pc) = ((p / w) as isize, (p % w) as isize);
            let (qr, qc) = ((q / w) as isize, (q % w) as isize);
            let forward = qr - pr == offset.0 && qc - pc == offset.1;
            let backward = pr - qr == offset.0 && pc - qc == offset.1;
            if (forward || backward) && valid[p] && valid[q] {
                m[gray[p]][gray[q]] += 1;
            }
        }
    }
    m
}

fn contrast_oracle(m: &[Vec<u64>]) -> f64 {
    let total: u64 = m.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let d = i as f64 - j as f64;
            s += c as f64 / total as f64 * d * d;
        }
    }
    s
}

fn homogeneity_oracle(m: &[Vec<u64>]) -> f64 {
    let total: u64 = m.iter().flatten().sum();
    if total == 0 {
        return 1.0;
    }
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let d = i as f64 - j as f64;
            s += c as f64 / total as f64 / (1.0 + d * d);
        }
    }
    s
}

fn patch_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<bool>)> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(0.0f64..=1.0, w * h),
            prop::collection::vec(prop::bool::weighted(0.85), w * h),
        )
    })
}

proptest! {
    #[test]
    fn glcm_counts_match_double_loop(
        (w, h, values, valid) in patch_strategy(),
        levels in 2usize..=8,
        dr in -2isize..=2,
        dc in -2isize..=2,
    ) {
        prop_assume!(dr != 0 || dc != 0);
        let gray: Vec<usize> = values.iter().map(|&v| gray_level(v, levels)).collect();
        let g = Glcm::from_patch(&gray, &valid, w, h, (dr, dc), levels);
        let oracle = glcm_oracle(&gray, &valid, w, h, (dr, dc), levels);
        for i in 0..levels {
            for j in 0..levels {
                prop_assert_eq!(g.count(i, j), oracle[i][j], "cell ({}, {})", i, j);
            }
        }
        prop_assert_eq!(g.stats().contrast, contrast_oracle(&oracle));
        prop_assert_eq!(g.stats().homogeneity, homogeneity_oracle(&oracle));
    }

    /// An odd square patch seen through a window of its own size: the centre
    /// pixel's feature is the statistic of the whole patch.
    #[test]
    fn haralick_extractor_matches_oracle_on_centre_pixel(
        half in 1usize..=3,
        seed_values in prop::collection::vec(0.0f64..=1.0, 49),
        levels in 2usize..=8,
    ) {
        let side = 2 * half + 1;
        let values = seed_values[..side * side].to_vec();
        let raster = Raster::new(side, side, values, None).unwrap();
        let spec = FeatureSpec::new("haralick_contrast")
            .with_param("window", side as f64)
            .with_param("levels", levels as f64);
        let map = extract(&raster, &spec).unwrap();
        let gray: Vec<usize> = raster.intensities().iter().map(|&v| gray_level(v, levels)).collect();
        let oracle = glcm_oracle(&gray, &vec![true; side * side], side, side, (0, 1), levels);
        prop_assert_eq!(map[half * side + half], contrast_oracle(&oracle));
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Objective summed term by term with the local factor built from scratch.
#[allow(clippy::too_many_arguments)]
fn objective_oracle(
    x: &[Vec<f64>],
    nb: &[Vec<(usize, f64)>],
    v: &[Vec<f64>],
    u: &[Vec<f64>],
    t: &[Vec<f64>],
    gamma: &[f64],
    cfg: &SolverConfig,
    with_g: bool,
) -> f64 {
    let mut total = 0.0;
    for c in 0..v.len() {
        for j in 0..x.len() {
            let mut g = 0.0;
            if with_g {
                for &(k, d) in &nb[j] {
                    g += (1.0 - u[c][k]).powf(cfg.m) * dist2(&x[k], &v[c]) / (d + 1.0);
                }
            }
            let d2 = dist2(&x[j], &v[c]);
            total += cfg.a * u[c][j].powf(cfg.m) * (d2 + g)
                + cfg.b * t[c][j].powf(cfg.q) * d2
                + gamma[c] * (1.0 - t[c][j]).powf(cfg.q);
        }
    }
    total
}

fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j])
}

fn column_normalize(mut u: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for j in 0..u[0].len() {
        let s: f64 = u.iter().map(|r| r[j]).sum();
        for r in u.iter_mut() {
            r[j] /= s;
        }
    }
    u
}

proptest! {
    #[test]
    fn objective_matches_brute_force(
        x in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 6),
        v in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 2),
        u_raw in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 6), 2),
        t in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), 2),
        gamma in prop::collection::vec(0.01f64..5.0, 2),
        edges in prop::collection::vec((0usize..6, 0usize..6, 0.5f64..4.0), 0..8),
        a in 0.5f64..15.0,
        m in 1.2f64..3.0,
        q in 1.2f64..3.0,
    ) {
        let u = column_normalize(u_raw);
        let mut nb = vec![Vec::new(); 6];
        for (j, k, d) in edges {
            if j != k && !nb[j].iter().any(|&(q, _)| q == k) {
                nb[j].push((k, d));
                nb[k].push((j, d));
            }
        }
        let cfg = SolverConfig { a, b: 0.1 * a, m, q, clusters: 2, ..Default::default() };
        let features = FeatureMatrix::from_rows(&x).unwrap();
        let graph = SpatialGraph::new(nb.clone());
        for (algorithm, with_g) in [(Algorithm::Pflicm, true), (Algorithm::Pfcm, false)] {
            let mut p = Partition::from_parts(
                algorithm,
                to_array(&v),
                to_array(&u),
                Some(to_array(&t)),
            )
            .unwrap();
            p.gammas = gamma.clone();
            let got = objective(&features, Some(&graph), &p, &cfg);
            let want = objective_oracle(&x, &nb, &v, &u, &t, &gamma, &cfg, with_g);
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{algorithm}: {got} vs {want}");
        }
    }

    #[test]
    fn xb_matches_double_loop(
        x in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 4..12),
        v in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..4),
        seed in any::<u64>(),
    ) {
        let (n, c) = (x.len(), v.len());
        let mut s = seed | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            0.01 + (s % 1000) as f64 / 1000.0
        };
        let u = column_normalize((0..c).map(|_| (0..n).map(|_| next()).collect()).collect());
        let t: Vec<Vec<f64>> = (0..c).map(|_| (0..n).map(|_| next().min(1.0)).collect()).collect();
        let mut sep = f64::INFINITY;
        for i in 0..c {
            for k in 0..c {
                if i != k {
                    sep = sep.min(dist2(&v[i], &v[k]));
                }
            }
        }
        prop_assume!(sep > 1e-6);
        let features = FeatureMatrix::from_rows(&x).unwrap();
        let p = Partition::from_parts(Algorithm::Pflicm, to_array(&v), to_array(&u), Some(to_array(&t))).unwrap();
        let (mut num_xb, mut num_vxb) = (0.0, 0.0);
        for i in 0..c {
            for j in 0..n {
                let d = dist2(&x[j], &v[i]);
                num_xb += u[i][j] * u[i][j] * d;
                num_vxb += (u[i][j] * t[i][j]).powi(2) * d;
            }
        }
        let want_xb = num_xb / (n as f64 * sep);
        let want_vxb = num_vxb / (n as f64 * sep);
        let got_xb = xb(&features, &p).unwrap().value;
        let got_vxb = vxb(&features, &p).unwrap().value;
        prop_assert!((got_xb - want_xb).abs() <= 1e-12 * want_xb.max(1.0));
        prop_assert!((got_vxb - want_vxb).abs() <= 1e-12 * want_vxb.max(1.0));
    }
}
