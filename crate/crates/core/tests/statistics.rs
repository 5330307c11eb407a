mod common;

use common::z_score;
use fabc::channel::{product_channel_cdf, PortCorrelationProfile, SystemConfig};
use fabc::copula::CopulaSpec;
use fabc::metrics::{
    delay_outage_rate, equivalent_channel_cdf, outage_probability, DorThresholdMode,
};
use fabc::montecarlo::{estimate_dor, estimate_outage, sample_equivalent_gain};

fn ecdf_z(samples: &[f64], r: f64, p: f64) -> f64 {
    z_score(
        samples.iter().filter(|&&g| g <= r).count(),
        samples.len(),
        p,
    )
}

#[test]
fn single_port_draws_follow_product_law() {
    let p = PortCorrelationProfile::from_correlations(vec![1.0], 0.0).unwrap();
    let g = sample_equivalent_gain(&p, &CopulaSpec::independence(1), 1_000_000, 5).unwrap();
    assert!(ecdf_z(&g, 1.0, product_channel_cdf(1.0).unwrap()) <= 3.0);
}

#[test]
fn near_comonotone_ports_collapse_to_one() {
    let p = PortCorrelationProfile::from_correlations(vec![1.0; 4], 0.0).unwrap();
    let spec = CopulaSpec::clayton(4, 100.0).unwrap();
    let g = sample_equivalent_gain(&p, &spec, 200_000, 6).unwrap();
    for r in [0.1, 1.0] {
        // θ = 100 is not exactly comonotone: compare against the copula too
        let exact = equivalent_channel_cdf(r, &p, &spec).unwrap();
        assert!(ecdf_z(&g, r, exact) <= 3.0);
        assert!((exact - product_channel_cdf(r).unwrap()).abs() < 0.02);
    }
}

#[test]
fn correlated_draws_match_equivalent_cdf() {
    let p = PortCorrelationProfile::from_correlations(vec![1.0; 4], 0.0).unwrap();
    let spec = CopulaSpec::clayton(4, 1.0).unwrap();
    let g = sample_equivalent_gain(&p, &spec, 1_000_000, 7).unwrap();
    for r in [0.1, 1.0] {
        assert!(ecdf_z(&g, r, equivalent_channel_cdf(r, &p, &spec).unwrap()) <= 3.0);
    }
}

#[test]
fn outage_estimate_matches_closed_form() {
    let c = SystemConfig::default();
    let p = PortCorrelationProfile::from_config(&c).unwrap();
    let spec = p.homogeneous_spec();
    let exact = outage_probability(&c, &spec).unwrap().value;
    let est = estimate_outage(&c, &spec, 1_000_000, 8).unwrap();
    assert!(est.z_score(exact) <= 3.0, "{est:?} vs {exact}");
}

#[test]
fn confidence_interval_coverage() {
    let c = SystemConfig {
        avg_snr_db: 10.0,
        ..SystemConfig::default()
    };
    let p = PortCorrelationProfile::from_config(&c).unwrap();
    let spec = p.homogeneous_spec();
    let exact = outage_probability(&c, &spec).unwrap().value;
    let covered = (0..100u64)
        .filter(|&seed| {
            estimate_outage(&c, &spec, 100_000, 1000 + seed)
                .unwrap()
                .contains(exact)
        })
        .count();
    // 95% nominal; 90 is about 2.3 binomial σ below the mean
    assert!(covered >= 90, "coverage {covered}/100");
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let c = SystemConfig {
        avg_snr_db: 10.0,
        ..SystemConfig::default()
    };
    let spec = PortCorrelationProfile::from_config(&c)
        .unwrap()
        .homogeneous_spec();
    let se: Vec<f64> = [10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| estimate_outage(&c, &spec, n, 3).unwrap().std_error)
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio / 10f64.sqrt() - 1.0).abs() <= 0.2, "ratio {ratio}");
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let c = SystemConfig::default();
    let spec = PortCorrelationProfile::from_config(&c)
        .unwrap()
        .homogeneous_spec();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_outage(&c, &spec, 100_000, 21).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.hits, four.hits);
}

#[test]
fn corrected_dor_matches_and_paper_gap_is_reported() {
    let c = SystemConfig {
        avg_snr_db: 0.0,
        ..SystemConfig::default()
    };
    let spec = PortCorrelationProfile::from_config(&c)
        .unwrap()
        .homogeneous_spec();
    let corrected = delay_outage_rate(&c, &spec, DorThresholdMode::Corrected)
        .unwrap()
        .value;
    let est = estimate_dor(&c, &spec, DorThresholdMode::Corrected, 1_000_000, 9).unwrap();
    assert!(est.z_score(corrected) <= 3.0, "{est:?} vs {corrected}");

    let paper = delay_outage_rate(&c, &spec, DorThresholdMode::Paper)
        .unwrap()
        .value;
    let paper_mc = estimate_dor(&c, &spec, DorThresholdMode::Paper, 1_000_000, 9).unwrap();
    assert!(paper_mc.z_score(paper) <= 3.0, "{paper_mc:?} vs {paper}");
    println!(
        "paper-mode DOR {paper:.6e}, corrected-mode MC {:.6e}",
        est.estimate
    );
    assert!(paper > corrected);
}
