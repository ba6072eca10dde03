//! The experiment runners behind the CLI subcommands.
//!
//! Each runner samples a band, measures hyperbolicity constants or witness
//! deviations, and emits an [`ExperimentReport`] whose criteria embed both
//! sides of every asserted inequality. Everything except the wall-clock
//! duration is a pure function of the configuration and seed.

use std::time::Instant;

use anyhow::{bail, ensure, Context};
use serde::Deserialize;
use serde_json::json;

use bandlab_core::band::{AnchorKind, BandPoint, BandSpace, BandSpec, ProductMetricKind};
use bandlab_core::boundary::{self, ClassProbe, PointSequence};
use bandlab_core::metric::{matrix_from_csv, FiniteMetricSpace, MatrixFile};
use bandlab_core::model::{ModelPoint, ModelSpaceSpec};
use bandlab_core::rng::SplitMix64;
use bandlab_core::rough::{self, AuditOptions};

use crate::config::ExperimentConfig;
use crate::report::{Criterion, ExperimentReport};

const SQRT2_MINUS_1: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Distance matrix of one factor's coordinates of a band sample; the base
/// pair sits at index 0, so index 0 is the factor basepoint.
fn factor_coordinate_space(
    band: &BandSpace,
    pts: &[BandPoint],
    factor: usize,
) -> anyhow::Result<FiniteMetricSpace> {
    let space = band.factor(factor);
    let coords: Vec<ModelPoint> = pts
        .iter()
        .map(|p| if factor == 1 { p.p1 } else { p.p2 })
        .collect();
    let mut rows = vec![vec![0.0; coords.len()]; coords.len()];
    for i in 0..coords.len() {
        for j in (i + 1)..coords.len() {
            let d = space.model_distance(&coords[i], &coords[j])?;
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    Ok(FiniteMetricSpace::validate_metric(&rows)?)
}

struct BandMeasurement {
    delta_band: f64,
    band_three_point: f64,
    factor_three_points: [f64; 2],
    witness: String,
}

fn measure_band(band: &BandSpace, pts: &[BandPoint]) -> anyhow::Result<BandMeasurement> {
    let space = band.materialize(pts)?;
    let four = space.four_point_delta();
    let three = space.three_point_delta(0)?;
    let f1 = factor_coordinate_space(band, pts, 1)?.three_point_delta(0)?.delta;
    let f2 = factor_coordinate_space(band, pts, 2)?.three_point_delta(0)?.delta;
    Ok(BandMeasurement {
        delta_band: four.delta,
        band_three_point: three.delta,
        factor_three_points: [f1, f2],
        witness: format!("{:?}", four.witness),
    })
}

/// Product bound experiment: sample the band, compute its four-point
/// constant, and compare against twice the worse factor three-point
/// constant plus the band width.
pub fn run_theorem1(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_for_delta()?;
    let band = BandSpace::from_spec(&config.band)?;
    ensure!(
        band.metric() == ProductMetricKind::Max,
        "the product bound experiment runs on the max metric"
    );
    let pts = band.sample_band(config.n, config.radius_cap, config.seed)?;
    let m = measure_band(&band, &pts)?;
    let max_factor = m.factor_three_points[0].max(m.factor_three_points[1]);
    let bound = 2.0 * max_factor + band.delta();

    let mut report = ExperimentReport::new(config.echo());
    report.record("n", pts.len());
    report.record_f64("delta_band", m.delta_band);
    report.record("delta_band_witness", m.witness);
    report.record_f64("band_three_point", m.band_three_point);
    report.record_f64("factor1_three_point", m.factor_three_points[0]);
    report.record_f64("factor2_three_point", m.factor_three_points[1]);
    report.record_f64("bound", bound);
    report.push(Criterion::le(
        "four_point_delta <= 2*max_factor_three_point + width (every quadruple)",
        m.delta_band,
        bound + config.tolerance,
    ));
    report.push(Criterion::le(
        "band three_point(base) <= max_factor_three_point + width/2",
        m.band_three_point,
        max_factor + band.delta() / 2.0 + config.tolerance,
    ));
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Draw one band point from an explicit stream.
fn draw_point(
    band: &BandSpace,
    cap: f64,
    rng: &mut SplitMix64,
    diagonal: bool,
) -> anyhow::Result<BandPoint> {
    match band.anchor() {
        AnchorKind::Radial => {
            let r = rng.next_range(0.0, cap);
            if diagonal {
                let s = rng.next_u64();
                Ok(BandPoint {
                    p1: band.factor(1).radial_point(r, s)?,
                    p2: band.factor(2).radial_point(r, s)?,
                })
            } else {
                let lo = (r - band.delta() / 2.0).max(0.0);
                let hi = r + band.delta() / 2.0;
                let r1 = rng.next_range(lo, hi);
                let r2 = rng.next_range(lo, hi);
                let s1 = rng.next_u64();
                let s2 = rng.next_u64();
                Ok(BandPoint {
                    p1: band.factor(1).radial_point(r1, s1)?,
                    p2: band.factor(2).radial_point(r2, s2)?,
                })
            }
        }
        AnchorKind::Busemann => {
            let (lo, hi) = band.level_range(cap);
            let level = rng.next_range(lo, hi);
            if diagonal {
                let lateral = rng.next_range(-cap / 2.0, cap / 2.0);
                let mut twin = rng.clone();
                Ok(BandPoint {
                    p1: band.factor(1).horosphere_point(level, lateral, rng)?,
                    p2: band.factor(2).horosphere_point(level, lateral, &mut twin)?,
                })
            } else {
                let l1 = level + rng.next_range(-band.delta() / 2.0, band.delta() / 2.0);
                let l2 = level + rng.next_range(-band.delta() / 2.0, band.delta() / 2.0);
                let lat1 = rng.next_range(-cap / 2.0, cap / 2.0);
                let lat2 = rng.next_range(-cap / 2.0, cap / 2.0);
                Ok(BandPoint {
                    p1: band.factor(1).horosphere_point(l1, lat1, rng)?,
                    p2: band.factor(2).horosphere_point(l2, lat2, rng)?,
                })
            }
        }
    }
}

fn sample_pairs(
    band: &BandSpace,
    count: usize,
    cap: f64,
    seed: u64,
    diagonal: bool,
) -> anyhow::Result<Vec<(BandPoint, BandPoint)>> {
    let mut rng = SplitMix64::for_substream(seed, 0x9A12_55EE);
    (0..count)
        .map(|_| {
            Ok((
                draw_point(band, cap, &mut rng, diagonal)?,
                draw_point(band, cap, &mut rng, diagonal)?,
            ))
        })
        .collect()
}

fn audit_at_cap(
    band: &BandSpace,
    config: &ExperimentConfig,
    cap: f64,
) -> anyhow::Result<rough::AlmostGeodesicAudit> {
    let pairs = sample_pairs(band, config.pairs, cap, config.seed, config.diagonal)?;
    Ok(rough::almost_geodesic_audit(
        band,
        &pairs,
        AuditOptions {
            t_grid: config.t_grid,
            thinness_step: config.thinness_step,
        },
    )?)
}

/// Almost-geodesicity audit: witness deviations over sampled pairs and a
/// `t` grid, with an optional cap-doubling stability check.
pub fn run_theorem2_audit(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    let band = BandSpace::from_spec(&config.band)?;
    ensure!(
        band.metric() == ProductMetricKind::Max,
        "the witness audit runs on the max metric"
    );
    ensure!(config.pairs > 0, "need at least one pair to audit");

    let audit = audit_at_cap(&band, config, config.radius_cap)?;
    let mut report = ExperimentReport::new(config.echo());
    report.record("pairs", config.pairs);
    report.record("t_grid", config.t_grid);
    report.record_f64("k_emp", audit.k_emp);
    report.record_f64("k_theory", audit.k_theory);
    report.record_f64("factor1_thinness", audit.factor_thinness[0]);
    report.record_f64("factor2_thinness", audit.factor_thinness[1]);
    report.record_f64("comparison_max_excess", audit.comparison_max_excess);
    report.record_f64("min_membership_slack", audit.min_membership_slack);
    report.record(
        "worst_witness",
        json!({"pair": audit.worst.0, "t": audit.worst.1, "deviation": audit.worst.2}),
    );

    report.push(Criterion::le(
        "k_emp <= 4*(factor thinness + slack) + width",
        audit.k_emp,
        audit.k_theory + config.tolerance,
    ));
    report.push(Criterion::le(
        "factor comparison inequality excess <= 0",
        audit.comparison_max_excess,
        config.tolerance,
    ));
    report.push(Criterion::le(
        "witness membership slack >= 0",
        -audit.min_membership_slack,
        config.tolerance,
    ));

    let unbounded = band.factor(1).max_radius().is_infinite()
        && band.factor(2).max_radius().is_infinite();
    let scale_check = config.scale_check.unwrap_or(unbounded);
    if scale_check {
        let doubled = audit_at_cap(&band, config, 2.0 * config.radius_cap)?;
        report.record_f64("k_emp_doubled_cap", doubled.k_emp);
        let ratio = if audit.k_emp <= config.tolerance && doubled.k_emp <= config.tolerance {
            1.0
        } else {
            doubled.k_emp / audit.k_emp
        };
        report.record_f64("k_emp_cap_ratio", ratio);
        report.push(Criterion::le(
            "k_emp stable under cap doubling: |ratio - 1| <= 0.1",
            (ratio - 1.0).abs(),
            0.1,
        ));
    }
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Reproduce the Euclidean-metric divergence family: the four-point
/// defect grows linearly in the factor distance under the Euclidean
/// product metric while the max metric keeps it bounded.
pub fn run_counterexample(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    let band_e = BandSpace::from_spec(&config.band)?;
    ensure!(
        band_e.anchor() == AnchorKind::Busemann,
        "the divergence family lives in a Busemann-anchored band"
    );
    ensure!(
        band_e.metric() == ProductMetricKind::Euclidean,
        "the divergence family is measured under the Euclidean product metric"
    );
    ensure!(
        band_e.delta() == 0.0,
        "the divergence family needs a width-0 band"
    );
    ensure!(!config.d1_list.is_empty(), "need at least one factor distance");
    let band_m = BandSpace::new(
        band_e.factor(1).clone(),
        band_e.factor(2).clone(),
        band_e.delta(),
        band_e.anchor(),
        ProductMetricKind::Max,
    )?;

    let mut report = ExperimentReport::new(config.echo());
    let mut defects_e = Vec::new();
    let mut defects_m = Vec::new();
    let mut h2_three_point = 0.0f64;
    for &d1 in &config.d1_list {
        let quad = band_e.counterexample_family(d1)?;
        let de = band_e.four_point_defect(&quad)?;
        let dm = band_m.four_point_defect(&quad)?;
        defects_e.push(de);
        defects_m.push(dm);
        if d1 > 0.0 {
            report.push(Criterion::le(
                format!("euclidean defect at d1={d1} within 1e-4 of (sqrt2-1)*d1"),
                (de - SQRT2_MINUS_1 * d1).abs(),
                1e-4,
            ));
            // Measured factor constant on the quadruple's first
            // coordinates plus the basepoint.
            let factor = band_e.factor(1);
            let mut coords: Vec<ModelPoint> = vec![factor.basepoint()];
            coords.extend(quad.iter().map(|p| p.p1));
            let mut rows = vec![vec![0.0; coords.len()]; coords.len()];
            for i in 0..coords.len() {
                for j in (i + 1)..coords.len() {
                    let d = factor.model_distance(&coords[i], &coords[j])?;
                    rows[i][j] = d;
                    rows[j][i] = d;
                }
            }
            let fms = FiniteMetricSpace::validate_metric(&rows)?;
            h2_three_point = h2_three_point.max(fms.three_point_delta(0)?.delta);
        }
    }
    report.record(
        "defects_euclidean",
        serde_json::to_value(&defects_e).unwrap(),
    );
    report.record("defects_max", serde_json::to_value(&defects_m).unwrap());
    report.record_f64("factor_three_point_emp", h2_three_point);

    // Least-squares slope through the origin of (defect/2) against d1.
    let positive: Vec<(f64, f64)> = config
        .d1_list
        .iter()
        .zip(&defects_e)
        .filter(|(d1, _)| **d1 > 0.0)
        .map(|(d1, de)| (*d1, de / 2.0))
        .collect();
    let slope = positive.iter().map(|(x, y)| x * y).sum::<f64>()
        / positive.iter().map(|(x, _)| x * x).sum::<f64>();
    report.record_f64("lower_bound_slope", slope);
    report.push(Criterion::le(
        "slope of defect/2 against d1 within 1e-4 of (sqrt2-1)/2",
        (slope - SQRT2_MINUS_1 / 2.0).abs(),
        1e-4,
    ));

    let max_dm = defects_m.iter().cloned().fold(0.0, f64::max);
    report.record_f64("max_defect_max_metric", max_dm);
    report.push(Criterion::le(
        "max-metric defects bounded by the factor constant",
        max_dm,
        2.0 * h2_three_point + 1e-6,
    ));
    if defects_m.len() >= 2 {
        let last = defects_m[defects_m.len() - 1];
        let prev = defects_m[defects_m.len() - 2];
        report.push(Criterion::le(
            "max-metric defect growth under 5% at the largest d1",
            last,
            1.05 * prev + 1e-9,
        ));
    }
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Build a diagonal sequence marching to the boundary point at a fixed
/// abscissa offset in both half-plane factors.
fn diagonal_boundary_sequence(
    band: &BandSpace,
    offset: f64,
    len: usize,
    spacing: f64,
) -> anyhow::Result<Vec<BandPoint>> {
    let mut rng = SplitMix64::new(0);
    (0..len)
        .map(|j| {
            let level = j as f64 * spacing;
            // Lateral chosen so the Euclidean abscissa offset stays fixed:
            // the sequence then converges to a boundary point determined
            // by the offset.
            let lateral = (offset * level.exp()).asinh();
            Ok(BandPoint {
                p1: band.factor(1).horosphere_point(level, lateral, &mut rng)?,
                p2: band.factor(2).horosphere_point(level, lateral, &mut rng)?,
            })
        })
        .collect()
}

/// The limit-case experiment: the product bound and witness audit on a
/// Busemann-anchored band, plus a finite-window probe that diagonal
/// sequences over distinct boundary offsets are not equivalent.
pub fn run_limitcase(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_for_delta()?;
    let band = BandSpace::from_spec(&config.band)?;
    ensure!(
        band.anchor() == AnchorKind::Busemann,
        "the limit case anchors factors by Busemann functions"
    );
    ensure!(
        band.metric() == ProductMetricKind::Max,
        "the limit case runs on the max metric"
    );

    let mut report = ExperimentReport::new(config.echo());

    let pts = band.sample_band(config.n, config.radius_cap, config.seed)?;
    let m = measure_band(&band, &pts)?;
    let max_factor = m.factor_three_points[0].max(m.factor_three_points[1]);
    report.record_f64("delta_band", m.delta_band);
    report.record_f64("factor1_three_point", m.factor_three_points[0]);
    report.record_f64("factor2_three_point", m.factor_three_points[1]);
    report.push(Criterion::le(
        "four_point_delta <= 2*max_factor_three_point + width",
        m.delta_band,
        2.0 * max_factor + band.delta() + config.tolerance,
    ));

    // Stability of the band constant when the sampling cap doubles.
    let pts2 = band.sample_band(config.n, 2.0 * config.radius_cap, config.seed)?;
    let m2 = measure_band(&band, &pts2)?;
    report.record_f64("delta_band_doubled_cap", m2.delta_band);
    let floor = 1e-9;
    let ratio = if m.delta_band <= floor && m2.delta_band <= floor {
        1.0
    } else {
        m2.delta_band / m.delta_band.max(floor)
    };
    report.record_f64("delta_band_cap_ratio", ratio);
    report.push(Criterion::le(
        "delta_band stable under cap doubling: |ratio - 1| <= 0.1",
        (ratio - 1.0).abs(),
        0.1,
    ));

    // Witness audit on the Busemann band.
    let audit = audit_at_cap(&band, config, config.radius_cap)?;
    report.record_f64("k_emp", audit.k_emp);
    report.record_f64("k_theory", audit.k_theory);
    report.record_f64("comparison_max_excess", audit.comparison_max_excess);
    report.record_f64("min_membership_slack", audit.min_membership_slack);
    report.push(Criterion::le(
        "witness membership slack >= 0",
        -audit.min_membership_slack,
        config.tolerance,
    ));

    // Boundary probe: distinct offsets give non-equivalent sequences.
    // Runs when both factors are half-planes (trees have finite rays).
    let both_h2 = !band.factor(1).is_tree() && !band.factor(2).is_tree();
    report.record("probe_applicable", both_h2);
    if both_h2 {
        let base = band.base_pair();
        let seq_a = diagonal_boundary_sequence(&band, 1.0, config.probe_length, 1.0)?;
        let seq_b = diagonal_boundary_sequence(&band, 3.0, config.probe_length, 1.0)?;
        let probe = boundary::class_probe(
            &band,
            &seq_a,
            &seq_b,
            &base,
            config.probe_window,
            config.probe_threshold,
        )?;
        record_probe(&mut report, &probe);
        report.push(Criterion::flag(
            "both diagonal sequences converge to infinity",
            probe.first.converges && probe.second.converges,
        ));
        report.push(Criterion::flag(
            "distinct-offset diagonal sequences are not equivalent",
            !probe.equivalent,
        ));
    }
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn record_probe(report: &mut ExperimentReport, probe: &ClassProbe) {
    report.record(
        "probe",
        json!({
            "first_min": probe.first.min_tail_product,
            "first_converges": probe.first.converges,
            "second_min": probe.second.min_tail_product,
            "second_converges": probe.second.converges,
            "cross_min": probe.cross_min,
            "equivalent": probe.equivalent,
            "window": probe.first.window,
            "threshold": probe.first.threshold,
        }),
    );
}

/// Hyperbolicity constants of a distance-matrix file (CSV or JSON).
pub fn run_delta(text: &str, base: usize) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    let space = parse_matrix(text, base)?;
    let four = space.four_point_delta();
    let three = space.three_point_delta(space.base())?;
    let mut report = ExperimentReport::new(json!({"command": "delta", "base": space.base()}));
    report.record("n", space.len());
    report.record_f64("four_point_delta", four.delta);
    report.record("four_point_witness", format!("{:?}", four.witness));
    report.record_f64("three_point_delta", three.delta);
    report.record("three_point_witness", format!("{:?}", three.witness));
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn parse_matrix(text: &str, base: usize) -> anyhow::Result<FiniteMetricSpace> {
    let trimmed = text.trim_start();
    let mut space = if trimmed.starts_with('{') {
        let file: MatrixFile = serde_json::from_str(text).context("parsing JSON matrix")?;
        file.into_space()?
    } else {
        FiniteMetricSpace::validate_metric(&matrix_from_csv(text)?)?
    };
    if base != 0 {
        space.set_base(base)?;
    }
    Ok(space)
}

/// Flat CSV of per-quadruple defects, for plotting.
pub fn quadruple_defect_csv(space: &FiniteMetricSpace) -> String {
    let n = space.len();
    let mut out = String::from("i,j,k,l,defect\n");
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    out.push_str(&format!(
                        "{i},{j},{k},{l},{}\n",
                        space.quadruple_defect([i, j, k, l])
                    ));
                }
            }
        }
    }
    out
}

/// Probe input file: an ambient band (or model space) plus sequences.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ProbeFile {
    Band {
        band: BandSpec,
        sequences: Vec<Vec<BandPoint>>,
        #[serde(default)]
        base: Option<BandPoint>,
        #[serde(default = "crate::config::probe_window_default")]
        window: usize,
        #[serde(default = "crate::config::probe_threshold_default")]
        threshold: f64,
    },
    Model {
        space: ModelSpaceSpec,
        sequences: Vec<Vec<ModelPoint>>,
        #[serde(default)]
        base: Option<ModelPoint>,
        #[serde(default = "crate::config::probe_window_default")]
        window: usize,
        #[serde(default = "crate::config::probe_threshold_default")]
        threshold: f64,
    },
}

pub fn run_probe(text: &str) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    let file: ProbeFile = serde_json::from_str(text).context("parsing probe file")?;
    let mut report = ExperimentReport::new(json!({"command": "probe"}));
    match file {
        ProbeFile::Band {
            band,
            mut sequences,
            base,
            window,
            threshold,
        } => {
            ensure!(sequences.len() == 2, "probe expects exactly two sequences");
            let band = BandSpace::from_spec(&band)?;
            let base = base.unwrap_or_else(|| band.base_pair());
            let second = PointSequence::new(sequences.pop().unwrap(), base.clone())?;
            let first = PointSequence::new(sequences.pop().unwrap(), base)?;
            let probe = first.probe_against(&band, &second, window, threshold)?;
            record_probe(&mut report, &probe);
        }
        ProbeFile::Model {
            space,
            mut sequences,
            base,
            window,
            threshold,
        } => {
            ensure!(sequences.len() == 2, "probe expects exactly two sequences");
            let space = bandlab_core::model::ModelSpace::from_spec(&space)?;
            let base = base.unwrap_or_else(|| space.basepoint());
            let second = PointSequence::new(sequences.pop().unwrap(), base)?;
            let first = PointSequence::new(sequences.pop().unwrap(), base)?;
            let probe = first.probe_against(&space, &second, window, threshold)?;
            record_probe(&mut report, &probe);
        }
    }
    report.duration_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `band-sample`: draw points and optionally materialize them.
pub fn run_band_sample(
    spec_text: &str,
    n: usize,
    radius_cap: f64,
    seed: u64,
) -> anyhow::Result<(BandSpace, Vec<BandPoint>)> {
    let spec: BandSpec = serde_json::from_str(spec_text).context("parsing band spec")?;
    let band = BandSpace::from_spec(&spec)?;
    if n == 0 {
        bail!("need at least one sample point");
    }
    let pts = band.sample_band(n, radius_cap, seed)?;
    Ok((band, pts))
}

pub fn dispatch(name: &str, config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    match name {
        "theorem1" => run_theorem1(config),
        "theorem2" => run_theorem2_audit(config),
        "counterexample" => run_counterexample(config),
        "limitcase" => run_limitcase(config),
        other => bail!("unknown experiment {other}"),
    }
}
