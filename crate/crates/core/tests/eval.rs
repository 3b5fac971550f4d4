mod support;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use sasforge::eval::{fid, nearest_neighbors, nearest_rows, tsne, FeatureStats, Metric, TsneConfig};
use sasforge::models::{Autoencoder, AutoencoderConfig};
use sasforge::render::Image;
use sasforge::Error;

fn stats(mean: Vec<f64>, cov: Vec<f64>) -> FeatureStats {
    FeatureStats::new(mean, cov).unwrap()
}

/// Random PSD covariance `M Mᵀ / d` and a random mean.
fn random_stats(seed: u64, d: usize) -> FeatureStats {
    let mut rng = support::rng(seed);
    let m: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let mut cov = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            cov[i * d + j] = (0..d).map(|k| m[i * d + k] * m[j * d + k]).sum::<f64>() / d as f64;
        }
    }
    stats(support::uniform_vec(&mut rng, d, -1.0, 1.0), cov)
}

#[test]
fn fid_closed_forms() {
    let a = random_stats(1, 16);
    assert!(fid(&a, &a).unwrap().abs() < 1e-6);
    let one = fid(&stats(vec![0.0], vec![1.0]), &stats(vec![2.0], vec![4.0])).unwrap();
    assert!((one - 5.0).abs() < 1e-6, "{one}");
    let id = vec![1.0, 0.0, 0.0, 1.0];
    let two = fid(&stats(vec![0.0, 0.0], id.clone()), &stats(vec![1.0, 0.0], id)).unwrap();
    assert!((two - 1.0).abs() < 1e-6, "{two}");
}

#[test]
fn fid_matches_commuting_closed_form() {
    // Diagonal covariances commute: the trace term is Σ (√a_i − √b_i)².
    let mut rng = support::rng(7);
    let d = 12;
    let (a, b) = (support::uniform_vec(&mut rng, d, 0.1, 3.0), support::uniform_vec(&mut rng, d, 0.1, 3.0));
    let (ma, mb) = (support::uniform_vec(&mut rng, d, -1.0, 1.0), support::uniform_vec(&mut rng, d, -1.0, 1.0));
    let diag = |v: &[f64]| {
        let mut c = vec![0.0; d * d];
        (0..d).for_each(|i| c[i * d + i] = v[i]);
        c
    };
    let expect = support::sq_dist(&ma, &mb) + a.iter().zip(&b).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).sum::<f64>();
    let got = fid(&stats(ma, diag(&a)), &stats(mb, diag(&b))).unwrap();
    assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
}

#[test]
fn fid_rejects_bad_input() {
    assert!(matches!(fid(&random_stats(1, 3), &random_stats(2, 4)), Err(Error::Shape { .. })));
    assert!(FeatureStats::new(vec![f64::NAN], vec![1.0]).is_err() || fid(&stats(vec![f64::NAN], vec![1.0]), &stats(vec![0.0], vec![1.0])).is_err());
    assert!(matches!(FeatureStats::from_features(&[vec![1.0, 2.0]]), Err(Error::Data(_))));
}

#[test]
fn stats_match_two_pass_summation() {
    let mut rng = support::rng(3);
    let rows: Vec<Vec<f64>> = (0..17).map(|_| support::uniform_vec(&mut rng, 9, -2.0, 5.0)).collect();
    let s = FeatureStats::from_features(&rows).unwrap();
    let (mean, cov) = support::two_pass_stats(&rows);
    for j in 0..9 {
        assert!((s.mean[j] - mean[j]).abs() < 1e-10);
        for k in 0..9 {
            assert!((s.cov[j * 9 + k] - cov[j][k]).abs() < 1e-10);
            assert!((s.cov[j * 9 + k] - s.cov[k * 9 + j]).abs() < 1e-9);
        }
    }
    let same = FeatureStats::from_features(&[rows[0].clone(), rows[0].clone()]).unwrap();
    assert!(same.cov.iter().all(|&c| c == 0.0));
}

#[test]
fn feature_stats_of_images_need_two_images() {
    let ae = Autoencoder::new(AutoencoderConfig { image_size: 16, ..Default::default() }, 1).unwrap();
    let img = Image::filled(16, 16, 0.4).unwrap();
    assert!(matches!(sasforge::eval::feature_stats(&[&img], &ae), Err(Error::Data(_))));
    let s = sasforge::eval::feature_stats(&[&img, &img], &ae).unwrap();
    assert_eq!(s.dim(), 1024);
    assert!(s.cov.iter().all(|&c| c.abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fid_is_symmetric_and_nonnegative(sa in any::<u64>(), sb in any::<u64>(), d in 1usize..10) {
        let (a, b) = (random_stats(sa, d), random_stats(sb, d));
        let (ab, ba) = (fid(&a, &b).unwrap(), fid(&b, &a).unwrap());
        prop_assert!((ab - ba).abs() < 1e-6, "{} vs {}", ab, ba);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn fid_grows_with_mean_separation(seed in any::<u64>(), d in 1usize..8) {
        let a = random_stats(seed, d);
        let dir = {
            let mut rng = support::rng(seed ^ 1);
            let v = support::uniform_vec(&mut rng, d, -1.0, 1.0);
            let n = support::sq_dist(&v, &vec![0.0; d]).sqrt().max(1e-9);
            v.into_iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let b_cov = random_stats(seed.wrapping_add(7), d).cov;
        let mut last = -1.0;
        for step in 0..6 {
            let delta = step as f64 * 0.5;
            let mean: Vec<f64> = a.mean.iter().zip(&dir).map(|(m, u)| m + delta * u).collect();
            let f = fid(&a, &stats(mean, b_cov.clone())).unwrap();
            prop_assert!(f > last, "δ = {}: {} ≤ {}", delta, f, last);
            last = f;
        }
    }

    #[test]
    fn nearest_rows_match_a_double_loop(seed in any::<u64>(), n in 1usize..30, d in 1usize..6, k_frac in 0.0f64..1.0) {
        let mut rng = support::rng(seed);
        // Coarse values force ties.
        let data: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(0..4) as f64).collect()).collect();
        let q: Vec<f64> = (0..d).map(|_| rng.random_range(0..4) as f64).collect();
        let k = ((n as f64 * k_frac) as usize).max(1);
        let got = nearest_rows(&q, &data, k).unwrap();
        let mut brute = Vec::new();
        for (i, r) in data.iter().enumerate() {
            let mut s = 0.0;
            for j in 0..d {
                s += (q[j] - r[j]) * (q[j] - r[j]);
            }
            brute.push((i, s.sqrt()));
        }
        // Stable sort keeps lower indices first among ties.
        brute.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        prop_assert_eq!(got, brute[..k].to_vec());
    }
}

fn tiny_images() -> Vec<Image> {
    vec![
        Image::new(2, 1, vec![0.0, 0.0]).unwrap(),
        Image::new(2, 1, vec![0.3, 0.4]).unwrap(),
        Image::new(2, 1, vec![1.0, 0.0]).unwrap(),
    ]
}

#[test]
fn nearest_images_by_hand() {
    let data = tiny_images();
    let refs: Vec<&Image> = data.iter().collect();
    let q = Image::new(2, 1, vec![0.9, 0.0]).unwrap();
    let nn = nearest_neighbors(&q, &refs, 3, Metric::ImageL2, None).unwrap();
    // Distances: 0.9, √(0.36 + 0.16) ≈ 0.7211, 0.1.
    assert_eq!(nn.iter().map(|p| p.0).collect::<Vec<_>>(), vec![2, 1, 0]);
    assert!((nn[0].1 - 0.1).abs() < 1e-12 && (nn[1].1 - 0.52f64.sqrt()).abs() < 1e-12 && (nn[2].1 - 0.9).abs() < 1e-12);
    let own = nearest_neighbors(&data[1], &refs, 1, Metric::ImageL2, None).unwrap();
    assert_eq!(own, vec![(1, 0.0)]);
    assert!(matches!(nearest_neighbors(&q, &refs, 4, Metric::ImageL2, None), Err(Error::Parameter(_))));
}

#[test]
fn feature_metric_needs_an_autoencoder_and_finds_itself() {
    let mut rng = support::rng(5);
    let data: Vec<Image> = (0..4).map(|_| Image::new(16, 16, support::uniform_vec(&mut rng, 256, 0.0, 1.0)).unwrap()).collect();
    let refs: Vec<&Image> = data.iter().collect();
    assert!(nearest_neighbors(&data[0], &refs, 1, Metric::Phi, None).is_err());
    let ae = Autoencoder::new(AutoencoderConfig { image_size: 16, ..Default::default() }, 2).unwrap();
    let nn = nearest_neighbors(&data[2], &refs, 4, Metric::Phi, Some(&ae)).unwrap();
    assert_eq!(nn[0], (2, 0.0));
    assert_eq!(nn.len(), 4);
    assert!("phi".parse::<Metric>().unwrap() == Metric::Phi && "cosine".parse::<Metric>().is_err());
}

#[test]
fn tsne_separates_clusters_deterministically() {
    let (rows, labels) = support::clusters(1, 3, 30, 5, 20.0);
    let cfg = TsneConfig { perplexity: 10.0, iterations: 400, seed: 3, ..Default::default() };
    let a = tsne(&rows, &cfg).unwrap();
    assert!(support::knn_purity(&a.points, &labels, 10) >= 0.9);
    assert_eq!(a, tsne(&rows, &cfg).unwrap());
    assert_ne!(a.points, tsne(&rows, &TsneConfig { seed: 4, ..cfg }).unwrap().points);
}

#[test]
fn duplicated_rows_land_together() {
    let mut rng = support::rng(9);
    let mut rows: Vec<Vec<f64>> = (0..60).map(|_| support::uniform_vec(&mut rng, 8, 0.0, 1.0)).collect();
    rows.push(rows[17].clone());
    let e = tsne(&rows, &TsneConfig { perplexity: 8.0, iterations: 500, seed: 1, ..Default::default() }).unwrap();
    let dist = |i: usize, j: usize| ((e.points[i][0] - e.points[j][0]).powi(2) + (e.points[i][1] - e.points[j][1]).powi(2)).sqrt();
    let mut all: Vec<f64> = (0..rows.len()).flat_map(|i| (i + 1..rows.len()).map(move |j| (i, j))).map(|(i, j)| dist(i, j)).collect();
    all.sort_by(f64::total_cmp);
    let cutoff = all[all.len() / 100];
    assert!(dist(17, 60) <= cutoff, "{} vs 1% cutoff {cutoff}", dist(17, 60));
}

#[test]
fn kl_settles_under_step_decay() {
    let trials = 10;
    let mut monotone = 0;
    for t in 0..trials {
        let mut rng = support::rng(100 + t);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| support::uniform_vec(&mut rng, 6, 0.0, 1.0)).collect();
        let cfg = TsneConfig { perplexity: 8.0, iterations: 400, exaggeration_iters: 100, lr_decay: 0.97, seed: t, ..Default::default() };
        let kl = tsne(&rows, &cfg).unwrap().kl_history;
        if kl[200..].windows(2).all(|w| w[1] <= w[0] + 1e-12) {
            monotone += 1;
        }
    }
    assert!(monotone * 10 >= trials * 9, "{monotone}/{trials} trials monotone");
}

#[test]
fn infeasible_perplexity_and_tiny_inputs_are_rejected() {
    let rows = vec![vec![0.0]; 10];
    assert!(matches!(tsne(&rows, &TsneConfig { perplexity: 3.0, ..Default::default() }), Err(Error::Parameter(_))));
    assert!(tsne(&rows[..3], &TsneConfig { perplexity: 0.5, ..Default::default() }).is_err());
}

#[test]
fn bandwidths_hit_the_target_perplexity() {
    let mut rng = support::rng(2);
    let n = 50;
    let rows: Vec<Vec<f64>> = (0..n).map(|_| support::uniform_vec(&mut rng, 4, 0.0, 3.0)).collect();
    let d2: Vec<f64> = rows.iter().flat_map(|a| rows.iter().map(move |b| support::sq_dist(a, b))).collect();
    let perplexity = 12.0f64;
    let p = sasforge::eval::conditional_affinities(&d2, n, perplexity);
    for i in 0..n {
        let row = &p[i * n..(i + 1) * n];
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(row[i], 0.0);
        let h: f64 = row.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
        assert!((h - perplexity.ln()).abs() < sasforge::eval::ENTROPY_TOL, "row {i}: entropy {h}");
    }
}
