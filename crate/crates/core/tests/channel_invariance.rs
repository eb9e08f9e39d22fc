use epsfp::channel::ChannelPreset;
use epsfp::classifier::{FeatureMatrix, Representation};
use epsfp::eval::{DomainSpec, Extractor, FrameGenerator, Scenario};
use epsfp::signal::cosine_similarity;

fn mean_cross_domain_similarity(mats: &[FeatureMatrix], device: &str) -> f64 {
    let rows = |m: &FeatureMatrix| -> Vec<Vec<f64>> {
        (0..m.n_rows())
            .filter(|&i| m.labels[i] == device)
            .map(|i| m.row_f64(i))
            .collect()
    };
    let per_domain: Vec<Vec<Vec<f64>>> = mats.iter().map(rows).collect();
    let (mut sum, mut n) = (0.0, 0);
    for a in 0..per_domain.len() {
        for b in a + 1..per_domain.len() {
            for x in &per_domain[a] {
                for y in &per_domain[b] {
                    sum += cosine_similarity(x, y);
                    n += 1;
                }
            }
        }
    }
    sum / n as f64
}

/// Same device, different channels: EPS rows agree, raw-IQ rows do not.
#[test]
fn eps_is_stable_across_domains_and_raw_iq_is_not() {
    let mut s = Scenario::default();
    s.population.n_devices = 5;
    s.population.separation_hz = 2_000.0;
    s.domains = [
        ChannelPreset::Wired,
        ChannelPreset::Wireless1m,
        ChannelPreset::Wireless3m,
        ChannelPreset::Random3m,
    ]
    .iter()
    .map(|&p| DomainSpec::new(p.as_str(), p))
    .collect();
    let gen = FrameGenerator::new(&s).unwrap();
    let ex = [
        Extractor::for_scenario(&s, Representation::Eps),
        Extractor::for_scenario(&s, Representation::RawIq),
    ];
    let mut eps = Vec::new();
    let mut raw = Vec::new();
    for d in &s.domains {
        let mut m = gen.domain_features(d, 3, &ex).unwrap();
        raw.push(m.pop().unwrap());
        eps.push(m.pop().unwrap());
    }
    for p in gen.population() {
        let e = mean_cross_domain_similarity(&eps, &p.device_id);
        let r = mean_cross_domain_similarity(&raw, &p.device_id);
        assert!(e >= 0.98, "{}: EPS {e}", p.device_id);
        assert!(r <= 0.90, "{}: raw {r}", p.device_id);
    }
}

/// Within one domain every EPS row is nearer its own device's rows than any
/// other device's.
#[test]
fn devices_are_separable_within_a_domain() {
    let mut s = Scenario::default();
    s.population.n_devices = 4;
    let gen = FrameGenerator::new(&s).unwrap();
    let ex = [Extractor::for_scenario(&s, Representation::Eps)];
    let m = gen
        .domain_features(&s.domains[1], 3, &ex)
        .unwrap()
        .remove(0);
    for i in 0..m.n_rows() {
        let (mut own, mut other) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for j in (0..m.n_rows()).filter(|&j| j != i) {
            let c = cosine_similarity(&m.row_f64(i), &m.row_f64(j));
            let best = if m.labels[i] == m.labels[j] {
                &mut own
            } else {
                &mut other
            };
            *best = best.max(c);
        }
        assert!(own > other, "{}: own {own}, other {other}", m.labels[i]);
    }
}
