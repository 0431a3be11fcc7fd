use lattice_smooth::field_gen::{innovations, theoretical_covariance, LinearCoefficient};
use lattice_smooth::{generate, GeneratorSpec, InnovationLaw, LatticeShape, LinkFunction};

/// Mean of `values` and its batch-means standard error over 100 batches.
fn batch_mean(values: &[f64]) -> (f64, f64) {
    let batches = 100;
    let size = values.len() / batches;
    let means: Vec<f64> = values.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (m, (var / means.len() as f64).sqrt())
}

fn md_tanh() -> GeneratorSpec {
    GeneratorSpec::MdNeighbor { innovation: InnovationLaw::gaussian(1.0), link: LinkFunction::Tanh }
}

#[test]
fn md_mean_and_variance_match_theory() {
    let spec = md_tanh();
    let field = generate(&spec, LatticeShape::new(1, 100_000).unwrap(), 11).unwrap();
    let x = field.values();
    let (mean, se) = batch_mean(x);
    assert!(mean.abs() <= 4.0 * se, "mean {mean} se {se}");
    let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
    let (var, var_se) = batch_mean(&squares);
    assert!((var - spec.variance()).abs() <= 5.0 * var_se, "variance {var} vs {}", spec.variance());
}

#[test]
fn linear_autocovariances_match_theory() {
    let spec = GeneratorSpec::linear_1d(InnovationLaw::uniform(1.0), &[1.0, 0.5, -0.25]);
    let field = generate(&spec, LatticeShape::new(1, 200_000).unwrap(), 12).unwrap();
    let x = field.values();
    for lag in 0..5usize {
        let products: Vec<f64> = x.windows(lag + 1).map(|w| w[0] * w[lag]).collect();
        let (cov, se) = batch_mean(&products);
        let truth = theoretical_covariance(&spec, &[lag as i64]);
        assert!((cov - truth).abs() <= 5.0 * se, "lag {lag}: {cov} vs {truth} (se {se})");
    }
}

#[test]
fn md_is_uncorrelated_with_functions_of_the_lex_past() {
    let spec = md_tanh();
    let n = 400;
    let field = generate(&spec, LatticeShape::new(2, n).unwrap(), 13).unwrap();
    let n = n as i64;
    for past in [[-1i64, 0], [0, -1], [-1, 1], [-2, 0]] {
        let mut products = Vec::new();
        for i in 3..=n - 2 {
            for j in 3..=n - 2 {
                let now = field.at(&[i, j]).unwrap();
                let before = field.at(&[i + past[0], j + past[1]]).unwrap();
                products.push(now * before * before);
            }
        }
        let (m, se) = batch_mean(&products);
        assert!(m.abs() <= 4.0 * se, "past offset {past:?}: {m} (se {se})");
    }
}

#[test]
fn blocks_farther_than_the_radius_are_uncorrelated() {
    let spec = md_tanh();
    let radius = spec.dependence_radius(1);
    assert_eq!(radius, 1);
    let field = generate(&spec, LatticeShape::new(1, 300_000).unwrap(), 14).unwrap();
    let x = field.values();
    let gap = radius as usize + 1;
    let centered: Vec<f64> = x.iter().map(|v| v * v - spec.variance()).collect();
    let products: Vec<f64> = centered.windows(gap + 1).map(|w| w[0] * w[gap]).collect();
    let (m, se) = batch_mean(&products);
    assert!(m.abs() <= 4.0 * se, "{m} (se {se})");
    let near: Vec<f64> = centered.windows(2).map(|w| w[0] * w[1]).collect();
    let (m_near, se_near) = batch_mean(&near);
    assert!(m_near > 4.0 * se_near, "squares of neighbours should correlate: {m_near} (se {se_near})");
}

#[test]
fn linear_field_is_the_convolution_of_its_innovations() {
    let spec = GeneratorSpec::Linear {
        innovation: InnovationLaw::gaussian(2.0),
        coefficients: vec![
            LinearCoefficient::new(vec![0, 0], 1.0),
            LinearCoefficient::new(vec![1, -1], 0.3),
            LinearCoefficient::new(vec![0, 2], -0.7),
        ],
    };
    let shape = LatticeShape::new(2, 12).unwrap();
    let field = generate(&spec, shape, 15).unwrap();
    let xi = innovations(&spec, shape, 15).unwrap();
    for i in shape.indices() {
        let direct: f64 = [([0, 0], 1.0), ([1, -1], 0.3), ([0, 2], -0.7)]
            .iter()
            .map(|(o, a)| a * xi.get(&[i[0] - o[0], i[1] - o[1]]).unwrap())
            .sum();
        assert!((field.at(&i).unwrap() - direct).abs() < 1e-14);
    }
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let spec = md_tanh();
    let shape = LatticeShape::new(2, 20).unwrap();
    let a = generate(&spec, shape, 5).unwrap();
    let b = generate(&spec, shape, 5).unwrap();
    let c = generate(&spec, shape, 6).unwrap();
    assert_eq!(a.values(), b.values());
    assert_ne!(a.values(), c.values());
}

#[test]
fn invalid_specs_are_rejected() {
    let shape = LatticeShape::new(1, 10).unwrap();
    let empty = GeneratorSpec::Linear { innovation: InnovationLaw::Rademacher, coefficients: vec![] };
    assert!(generate(&empty, shape, 1).is_err());
    let wrong_dim = GeneratorSpec::Linear {
        innovation: InnovationLaw::Rademacher,
        coefficients: vec![LinearCoefficient::new(vec![0, 0], 1.0)],
    };
    assert!(generate(&wrong_dim, shape, 1).is_err());
    let bad_sigma = GeneratorSpec::Iid { innovation: InnovationLaw::gaussian(f64::NAN) };
    assert!(generate(&bad_sigma, shape, 1).is_err());
    assert!(LatticeShape::new(0, 10).is_err());
}
