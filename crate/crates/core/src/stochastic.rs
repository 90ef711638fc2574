//! Seeded Monte Carlo: categorical sampling of joint outcomes, synthetic
//! time-tagged detection streams and coincidence matching.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A run seed
//! selects the key through `SeedableRng::seed_from_u64` and independent
//! chunks read disjoint ChaCha streams (`set_stream(chunk_index)`), so
//! parallel and sequential execution draw identical numbers on every
//! platform.
//!
//! Reference vectors, first three `u64` outputs:
//!
//! | seed | stream | outputs |
//! |------|--------|---------|
//! | 0    | 0      | 13080132717333068652, 8594738769458413623, 12896916468484187878 |
//! | 42   | 0      | 12578764544318200737, 17529487244874322312, 7886285670807131020 |
//! | 42   | 1      | 13222472167927179408, 3078952320862533021, 8898984633443201687 |

use std::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QError, Result};
use crate::nonlocal::CorrelationStats;

/// Draws per parallel chunk in [`sample_joint`].
pub const CHUNK: u64 = 1 << 16;

/// Jitter samples beyond this many standard deviations are redrawn.
pub const JITTER_TRUNCATION: f64 = 6.0;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Port {
    One,
    Two,
}

impl Port {
    fn index(self) -> usize {
        match self {
            Port::One => 0,
            Port::Two => 1,
        }
    }

    pub fn label(self, side: char) -> String {
        format!("{side}{}", self.index() + 1)
    }
}

/// Counts per joint outcome in `(A1,B1), (A1,B2), (A2,B1), (A2,B2)` order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    counts: [u64; 4],
    total: u64,
}

impl Tally {
    pub fn from_counts(counts: [u64; 4]) -> Self {
        Tally {
            counts,
            total: counts.iter().sum(),
        }
    }

    pub fn record(&mut self, a: Port, b: Port) {
        self.counts[a.index() * 2 + b.index()] += 1;
        self.total += 1;
    }

    pub fn get(&self, a: Port, b: Port) -> u64 {
        self.counts[a.index() * 2 + b.index()]
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.iter().sum::<u64>() == self.total
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        for (c, r) in self.counts.iter_mut().zip(rhs.counts) {
            *c += r;
        }
        self.total += rhs.total;
    }
}

const OUTCOMES: [(Port, Port); 4] = [
    (Port::One, Port::One),
    (Port::One, Port::Two),
    (Port::Two, Port::One),
    (Port::Two, Port::Two),
];

fn draw_outcome<R: Rng>(rng: &mut R, cumulative: &[f64; 3]) -> (Port, Port) {
    let u: f64 = rng.random();
    let idx = cumulative.iter().position(|&c| u < c).unwrap_or(3);
    OUTCOMES[idx]
}

fn cumulative(stats: &CorrelationStats) -> [f64; 3] {
    let c1 = stats.p11;
    let c2 = c1 + stats.p12;
    [c1, c2, c2 + stats.p21]
}

/// `n` independent four-outcome draws. Chunks of [`CHUNK`] draws use their
/// own generator stream and are reduced by summation.
pub fn sample_joint(stats: &CorrelationStats, n: u64, seed: u64) -> Tally {
    let cum = cumulative(stats);
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, chunk);
            let draws = CHUNK.min(n - chunk * CHUNK);
            let mut t = Tally::default();
            for _ in 0..draws {
                let (a, b) = draw_outcome(&mut rng, &cum);
                t.record(a, b);
            }
            t
        })
        .reduce(Tally::default, |mut x, y| {
            x += y;
            x
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

/// `E = (N11 + N22 - N12 - N21) / N` with binomial standard error
/// `sqrt((1 - E²) / N)`.
pub fn estimate_correlation(t: &Tally) -> Result<Estimate> {
    if t.total == 0 {
        return Err(QError::EmptyTally);
    }
    let n = t.total as f64;
    let [n11, n12, n21, n22] = t.counts.map(|x| x as f64);
    let value = (n11 + n22 - n12 - n21) / n;
    let stderr = ((1.0 - value * value).max(0.0) / n).sqrt();
    Ok(Estimate {
        value,
        stderr,
        n: t.total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub time: f64,
    pub port: Port,
}

/// Time-ordered detections at one side's detector pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DetectionStream {
    events: Vec<Detection>,
}

impl DetectionStream {
    /// Sorts `events` by time.
    pub fn new(mut events: Vec<Detection>) -> Self {
        events.sort_by(|x, y| x.time.total_cmp(&y.time));
        DetectionStream { events }
    }

    pub fn events(&self) -> &[Detection] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_time_ordered(&self) -> bool {
        self.events.windows(2).all(|w| w[0].time <= w[1].time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamConfig {
    /// Number of emitted pairs.
    pub pairs: u64,
    /// Mean spacing of pair emissions, seconds.
    pub mean_interval: f64,
    /// Standard deviation of per-photon timing jitter, seconds.
    pub jitter: f64,
    /// Uncorrelated singles per stream, hertz.
    pub background_rate: f64,
    /// Background window `[0, duration)`, seconds; `pairs * mean_interval`
    /// when unset.
    pub duration: Option<f64>,
}

impl StreamConfig {
    pub fn effective_duration(&self) -> f64 {
        self.duration.unwrap_or(self.pairs as f64 * self.mean_interval)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean_interval > 0.0 && self.mean_interval.is_finite()) {
            return Err(QError::DomainError {
                name: "mean_interval",
                value: self.mean_interval,
                range: "(0, inf)",
            });
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(QError::DomainError {
                name: "jitter",
                value: self.jitter,
                range: "[0, inf)",
            });
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return Err(QError::DomainError {
                name: "background_rate",
                value: self.background_rate,
                range: "[0, inf)",
            });
        }
        let d = self.effective_duration();
        if !(d >= 0.0 && d.is_finite()) {
            return Err(QError::DomainError {
                name: "duration",
                value: d,
                range: "[0, inf)",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStreams {
    pub a: DetectionStream,
    pub b: DetectionStream,
    /// Joint outcomes of the emitted pairs.
    pub emitted: Tally,
    pub background_a: u64,
    pub background_b: u64,
    pub duration: f64,
}

fn truncated_jitter<R: Rng>(rng: &mut R, normal: &Option<Normal<f64>>, sigma: f64) -> f64 {
    let Some(normal) = normal else { return 0.0 };
    loop {
        let x = normal.sample(rng);
        if x.abs() <= JITTER_TRUNCATION * sigma {
            return x;
        }
    }
}

fn background<R: Rng>(rng: &mut R, rate: f64, duration: f64, out: &mut Vec<Detection>) -> u64 {
    if rate <= 0.0 || duration <= 0.0 {
        return 0;
    }
    let gap = Exp::new(rate).expect("positive rate");
    let mut t = 0.0;
    let mut count = 0;
    loop {
        t += gap.sample(rng);
        if t >= duration {
            return count;
        }
        let port = if rng.random::<bool>() { Port::One } else { Port::Two };
        out.push(Detection { time: t, port });
        count += 1;
    }
}

/// Pair emissions at Poisson-spaced times with outcomes drawn from `stats`,
/// independent Gaussian jitter per photon and Poisson background singles on
/// each side. Streams 0, 1 and 2 of `seed` drive pairs, A background and
/// B background.
pub fn generate_streams(stats: &CorrelationStats, cfg: &StreamConfig, seed: u64) -> Result<GeneratedStreams> {
    cfg.validate()?;
    let cum = cumulative(stats);
    let mut rng = stream_rng(seed, 0);
    let gap = Exp::new(1.0 / cfg.mean_interval).expect("positive interval");
    let normal = (cfg.jitter > 0.0).then(|| Normal::new(0.0, cfg.jitter).expect("finite jitter"));

    let n = cfg.pairs as usize;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut emitted = Tally::default();
    let mut t = 0.0;
    for _ in 0..cfg.pairs {
        t += gap.sample(&mut rng);
        let (pa, pb) = draw_outcome(&mut rng, &cum);
        emitted.record(pa, pb);
        let ja = truncated_jitter(&mut rng, &normal, cfg.jitter);
        let jb = truncated_jitter(&mut rng, &normal, cfg.jitter);
        a.push(Detection { time: t + ja, port: pa });
        b.push(Detection { time: t + jb, port: pb });
    }

    let duration = cfg.effective_duration();
    let background_a = background(&mut stream_rng(seed, 1), cfg.background_rate, duration, &mut a);
    let background_b = background(&mut stream_rng(seed, 2), cfg.background_rate, duration, &mut b);

    Ok(GeneratedStreams {
        a: DetectionStream::new(a),
        b: DetectionStream::new(b),
        emitted,
        background_a,
        background_b,
        duration,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoincidenceResult {
    pub tally: Tally,
    pub unmatched_a: u64,
    pub unmatched_b: u64,
}

impl CoincidenceResult {
    pub fn matched(&self) -> u64 {
        self.tally.total()
    }
}

/// Greedy nearest-in-time pairing: each A event, in time order, takes the
/// closest unused B event with `|Δt| <= window`; equal distances go to the
/// earlier B event.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
pub fn coincidence_match(a: &DetectionStream, b: &DetectionStream, window: f64) -> Result<CoincidenceResult> {
    if !(window >= 0.0) {
        return Err(QError::DomainError {
            name: "window",
            value: window,
            range: "[0, inf)",
        });
    }
    let bev = b.events();
    let mut used = vec![false; bev.len()];
    let mut lo = 0;
    let mut tally = Tally::default();
    for ea in a.events() {
        while lo < bev.len() && (used[lo] || bev[lo].time < ea.time - window) {
            lo += 1;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, eb) in bev.iter().enumerate().skip(lo) {
            if eb.time > ea.time + window {
                break;
            }
            if used[j] {
                continue;
            }
            let d = (eb.time - ea.time).abs();
            if d <= window && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            used[j] = true;
            tally.record(ea.port, bev[j].port);
        }
    }
    let matched = tally.total();
    Ok(CoincidenceResult {
        tally,
        unmatched_a: a.len() as u64 - matched,
        unmatched_b: b.len() as u64 - matched,
    })
}

/// Expected accidental coincidence rate `2 r_A r_B τ` for uncorrelated
/// singles.
pub fn accidental_rate(rate_a: f64, rate_b: f64, window: f64) -> f64 {
    2.0 * rate_a * rate_b * window
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::{joint_probs, RtoConfig};
    use rand::RngCore;
    use std::f64::consts::FRAC_PI_2;

    fn certain() -> CorrelationStats {
        CorrelationStats::from_joint(1.0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn generator_reference_vectors() {
        let first3 = |seed, stream| {
            let mut r = stream_rng(seed, stream);
            [r.next_u64(), r.next_u64(), r.next_u64()]
        };
        let v0 = first3(0, 0);
        let v42 = first3(42, 0);
        let v42s1 = first3(42, 1);
        assert_ne!(v42, v42s1);
        assert_ne!(v0, v42);
        assert_eq!(v42, first3(42, 0));
        assert_eq!(v0, GOLDEN_0_0);
        assert_eq!(v42, GOLDEN_42_0);
        assert_eq!(v42s1, GOLDEN_42_1);
    }

    const GOLDEN_0_0: [u64; 3] = [13080132717333068652, 8594738769458413623, 12896916468484187878];
    const GOLDEN_42_0: [u64; 3] = [12578764544318200737, 17529487244874322312, 7886285670807131020];
    const GOLDEN_42_1: [u64; 3] = [13222472167927179408, 3078952320862533021, 8898984633443201687];

    #[test]
    fn degenerate_distribution() {
        let t = sample_joint(&certain(), 1000, 3);
        assert_eq!(t.get(Port::One, Port::One), 1000);
        assert_eq!(t.total(), 1000);
    }

    #[test]
    fn sampling_is_deterministic_and_chunk_safe() {
        let stats = joint_probs(&RtoConfig::new(0.0, 1.0));
        let n = 3 * CHUNK + 17;
        let t1 = sample_joint(&stats, n, 11);
        assert_eq!(t1, sample_joint(&stats, n, 11));
        assert_eq!(t1.total(), n);
        assert!(t1.is_consistent());

        // sequential replay of the chunk streams
        let cum = cumulative(&stats);
        let mut seq = Tally::default();
        for chunk in 0..n.div_ceil(CHUNK) {
            let mut rng = stream_rng(11, chunk);
            for _ in 0..CHUNK.min(n - chunk * CHUNK) {
                let (a, b) = draw_outcome(&mut rng, &cum);
                seq.record(a, b);
            }
        }
        assert_eq!(t1, seq);
    }

    #[test]
    fn quarter_cells_at_right_angle() {
        let n = 100_000u64;
        let t = sample_joint(&joint_probs(&RtoConfig::new(0.0, FRAC_PI_2)), n, 5);
        let band = 4.0 * (n as f64 * 0.25 * 0.75).sqrt();
        for c in t.counts() {
            assert!((c as f64 - n as f64 / 4.0).abs() < band, "{c}");
        }
    }

    #[test]
    fn estimate_examples() {
        let e = estimate_correlation(&Tally::from_counts([50, 0, 0, 50])).unwrap();
        assert_eq!((e.value, e.stderr, e.n), (1.0, 0.0, 100));
        let e = estimate_correlation(&Tally::from_counts([25, 25, 25, 25])).unwrap();
        assert_eq!(e.value, 0.0);
        assert!((e.stderr - 0.1).abs() < 1e-15);
        assert!(matches!(
            estimate_correlation(&Tally::default()),
            Err(QError::EmptyTally)
        ));
    }

    #[test]
    fn estimate_at_sixty_degrees() {
        let n = 1_000_000;
        let t = sample_joint(&joint_probs(&RtoConfig::new(0.0, std::f64::consts::PI / 3.0)), n, 77);
        let e = estimate_correlation(&t).unwrap();
        assert!((e.value - 0.5).abs() < 4.0 * e.stderr);
    }

    fn cfg(pairs: u64, jitter: f64, background_rate: f64) -> StreamConfig {
        StreamConfig {
            pairs,
            mean_interval: 1e-3,
            jitter,
            background_rate,
            duration: None,
        }
    }

    #[test]
    fn zero_jitter_streams_coincide() {
        let stats = joint_probs(&RtoConfig::new(0.0, 0.8));
        let g = generate_streams(&stats, &cfg(2000, 0.0, 0.0), 1).unwrap();
        assert_eq!(g.a.len(), 2000);
        for (x, y) in g.a.events().iter().zip(g.b.events()) {
            assert_eq!(x.time, y.time);
        }
        let m = coincidence_match(&g.a, &g.b, 0.0).unwrap();
        assert_eq!(m.matched(), 2000);
        assert_eq!(m.tally, g.emitted);
        assert_eq!((m.unmatched_a, m.unmatched_b), (0, 0));
    }

    #[test]
    fn empty_streams() {
        let g = generate_streams(&certain(), &cfg(0, 1e-9, 0.0), 1).unwrap();
        assert!(g.a.is_empty() && g.b.is_empty());
    }

    #[test]
    fn jitter_breaks_exact_coincidence() {
        let g = generate_streams(&certain(), &cfg(500, 1e-9, 0.0), 2).unwrap();
        assert!(g.a.is_time_ordered() && g.b.is_time_ordered());
        assert_eq!(coincidence_match(&g.a, &g.b, 0.0).unwrap().matched(), 0);
        let wide = coincidence_match(&g.a, &g.b, 20e-9).unwrap();
        assert_eq!(wide.matched(), 500);
    }

    #[test]
    fn background_count_is_poissonian() {
        let rate = 2000.0;
        let c = StreamConfig {
            duration: Some(10.0),
            ..cfg(0, 0.0, rate)
        };
        let g = generate_streams(&certain(), &c, 8).unwrap();
        let mean = rate * 10.0;
        for n in [g.background_a, g.background_b] {
            assert!((n as f64 - mean).abs() < 4.0 * mean.sqrt());
        }
        assert_eq!(g.a.len() as u64, g.background_a);
    }

    #[test]
    fn greedy_prefers_nearest_then_earlier() {
        let ev = |t: f64, p| Detection { time: t, port: p };
        let a = DetectionStream::new(vec![ev(1.0, Port::One)]);
        let b = DetectionStream::new(vec![ev(0.5, Port::One), ev(1.5, Port::Two)]);
        let m = coincidence_match(&a, &b, 0.5).unwrap();
        // exact tie goes to the earlier event
        assert_eq!(m.tally.get(Port::One, Port::One), 1);
        assert_eq!(m.unmatched_b, 1);

        let b = DetectionStream::new(vec![ev(0.7, Port::One), ev(1.05, Port::Two)]);
        let m = coincidence_match(&a, &b, 0.5).unwrap();
        assert_eq!(m.tally.get(Port::One, Port::Two), 1);

        assert!(coincidence_match(&a, &b, -1.0).is_err());
    }

    #[test]
    fn stream_config_validation() {
        let bad = StreamConfig {
            mean_interval: 0.0,
            ..cfg(1, 0.0, 0.0)
        };
        assert!(generate_streams(&certain(), &bad, 0).is_err());
        assert!(generate_streams(&certain(), &cfg(1, -1.0, 0.0), 0).is_err());
        assert!(generate_streams(&certain(), &cfg(1, 0.0, -5.0), 0).is_err());
    }
}
