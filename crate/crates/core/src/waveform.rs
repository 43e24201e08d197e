//! Per-band OFDM waveform library and cross-ambiguity checks.
//!
//! Each band is split into `s` contiguous sub-bands `h_1..h_s`. Waveform `j`
//! for `j <= s` occupies the widest contiguous run of sub-bands that excludes
//! `h_j`; waveform `s + 1` occupies the full band. Whatever sub-band a
//! narrow-band primary user sits in, at least one library member avoids it.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::{self, Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Default sub-band count.
pub const DEFAULT_SUBBANDS: usize = 4;
/// Largest supported sub-band count.
pub const MAX_SUBBANDS: usize = 16;
/// Default orthogonality bound.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Fraction of each sub-band, per edge, left empty as guard.
const GUARD_FRACTION: f64 = 0.125;

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error("sub-band count must be even and in [2, {MAX_SUBBANDS}] (got {0})")]
    SubbandCount(usize),
    #[error("sub-band set is empty")]
    Empty,
    #[error("sub-band index {index} outside 1..={s}")]
    Index { index: usize, s: usize },
    #[error("sample count must be a power of two >= 64 (got {0})")]
    SampleCount(usize),
    #[error("too few samples per sub-band to place tones ({0})")]
    NoTones(usize),
    #[error("sample rates differ ({0} Hz vs {1} Hz)")]
    RateMismatch(f64, f64),
    #[error("bad signal dump: {0}")]
    Format(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Set of occupied sub-bands, 1-based indices into `1..=s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubbandSet {
    s: usize,
    members: BTreeSet<usize>,
}

impl SubbandSet {
    pub fn new(s: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, WaveformError> {
        check_subbands(s)?;
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&index) = members.iter().find(|&&i| i == 0 || i > s) {
            return Err(WaveformError::Index { index, s });
        }
        Ok(Self { s, members })
    }

    pub fn full(s: usize) -> Result<Self, WaveformError> {
        Self::new(s, 1..=s)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_contiguous(&self) -> bool {
        match (self.members.first(), self.members.last()) {
            (Some(lo), Some(hi)) => hi - lo + 1 == self.members.len(),
            _ => true,
        }
    }

    pub fn is_disjoint(&self, other: &SubbandSet) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn without(&self, index: usize) -> Self {
        let mut members = self.members.clone();
        members.remove(&index);
        Self { s: self.s, members }
    }
}

fn check_subbands(s: usize) -> Result<(), WaveformError> {
    if s < 2 || !s.is_multiple_of(2) || s > MAX_SUBBANDS {
        return Err(WaveformError::SubbandCount(s));
    }
    Ok(())
}

/// Longest run of consecutive indices; ties go to the lowest-starting run.
pub fn max_contiguous_block(set: &SubbandSet) -> Result<SubbandSet, WaveformError> {
    let mut best: Option<(usize, usize)> = None;
    let mut run: Option<(usize, usize)> = None;
    for &i in set.members() {
        run = match run {
            Some((start, end)) if end + 1 == i => Some((start, i)),
            _ => Some((i, i)),
        };
        let (start, end) = run.expect("just set");
        if best.is_none_or(|(bs, be)| end - start > be - bs) {
            best = Some((start, end));
        }
    }
    let (start, end) = best.ok_or(WaveformError::Empty)?;
    SubbandSet::new(set.s(), start..=end)
}

/// One library member: its 1-based index and occupied sub-bands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WaveformSpec {
    pub index: usize,
    pub occupied: SubbandSet,
}

impl WaveformSpec {
    pub fn bandwidth_fraction(&self) -> f64 {
        self.occupied.len() as f64 / self.occupied.s() as f64
    }

    pub fn is_full_band(&self) -> bool {
        self.occupied.len() == self.occupied.s()
    }
}

/// The `s + 1` waveforms of one band.
pub fn build_library(s: usize) -> Result<Vec<WaveformSpec>, WaveformError> {
    check_subbands(s)?;
    let full = SubbandSet::full(s)?;
    let mut library = Vec::with_capacity(s + 1);
    for j in 1..=s {
        library.push(WaveformSpec {
            index: j,
            occupied: max_contiguous_block(&full.without(j))?,
        });
    }
    library.push(WaveformSpec { index: s + 1, occupied: full });
    Ok(library)
}

/// Sampled complex baseband pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl BasebandSignal {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// `sum |x|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(Complex64::norm_sqr).sum::<f64>() / self.sample_rate
    }

    /// Energy computed from the DFT (Parseval).
    pub fn spectral_energy(&self) -> f64 {
        let spectrum = self.spectrum();
        spectrum.iter().map(Complex64::norm_sqr).sum::<f64>()
            / (self.samples.len() as f64 * self.sample_rate)
    }

    /// Unnormalized forward DFT in natural bin order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    /// Write `"WVFM"`, u32 sample count, u64 rate in Hz, then interleaved
    /// little-endian f64 (re, im).
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<(), WaveformError> {
        let count = u32::try_from(self.samples.len()).map_err(|_| WaveformError::Format("too many samples"))?;
        w.write_all(b"WVFM")?;
        w.write_all(&count.to_le_bytes())?;
        w.write_all(&(self.sample_rate.round() as u64).to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self, WaveformError> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != b"WVFM" {
            return Err(WaveformError::Format("missing WVFM magic"));
        }
        let count = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let rate = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
        let mut body = vec![0u8; count * 16];
        r.read_exact(&mut body)?;
        let samples = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self { samples, sample_rate: rate as f64 })
    }
}

/// Centered-spectrum bin range `[lo, hi)` of tones placed in sub-band `k`
/// (1-based) when `n` bins are split into `s` sub-bands.
pub fn tone_bins(n: usize, s: usize, k: usize) -> std::ops::Range<usize> {
    let width = n / s;
    let guard = (width as f64 * GUARD_FRACTION).ceil() as usize;
    let lo = (k - 1) * width + guard;
    let hi = k * width - guard;
    lo..hi
}

/// Unit-energy multitone pulse. The band of width `band_bandwidth` is
/// sampled at that rate; each occupied sub-band carries one tone group on
/// the FFT grid, with guard bins at the sub-band edges. Tone phases depend
/// only on the absolute bin, so two waveforms sharing a sub-band share its
/// tones.
pub fn synthesize(
    spec: &WaveformSpec,
    band_bandwidth: f64,
    n_samples: usize,
) -> Result<BasebandSignal, WaveformError> {
    if n_samples < 64 || !n_samples.is_power_of_two() {
        return Err(WaveformError::SampleCount(n_samples));
    }
    let s = spec.occupied.s();
    let per_band = n_samples / s;
    if tone_bins(n_samples, s, 1).is_empty() {
        return Err(WaveformError::NoTones(per_band));
    }

    // centered bin c maps to natural bin (c + n/2) mod n
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n_samples];
    for &k in spec.occupied.members() {
        for c in tone_bins(n_samples, s, k) {
            let phase = PI * (c * c) as f64 / n_samples as f64;
            spectrum[(c + n_samples / 2) % n_samples] = Complex64::from_polar(1.0, phase);
        }
    }
    FftPlanner::new().plan_fft_inverse(n_samples).process(&mut spectrum);

    let mut signal = BasebandSignal { samples: spectrum, sample_rate: band_bandwidth };
    let scale = signal.energy().sqrt().recip();
    signal.samples.iter_mut().for_each(|x| *x *= scale);
    Ok(signal)
}

/// Discrete `sum_n w1[n] conj(w2[n - d]) exp(i 2 pi f0 n / fs) dt` with
/// `d = round(tau * fs)`; samples outside either pulse are zero.
pub fn cross_ambiguity(
    w1: &BasebandSignal,
    w2: &BasebandSignal,
    tau: f64,
    f0: f64,
) -> Result<Complex64, WaveformError> {
    if w1.sample_rate != w2.sample_rate {
        return Err(WaveformError::RateMismatch(w1.sample_rate, w2.sample_rate));
    }
    let fs = w1.sample_rate;
    let d = (tau * fs).round() as i64;
    let step = 2.0 * PI * f0 / fs;
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, x) in w1.samples.iter().enumerate() {
        let m = n as i64 - d;
        if m < 0 || m as usize >= w2.samples.len() {
            continue;
        }
        acc += x * w2.samples[m as usize].conj() * Complex64::from_polar(1.0, step * n as f64);
    }
    Ok(acc / fs)
}

/// Delay/Doppler grid over which near-orthogonality is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityGrid {
    pub delays: Vec<f64>,
    pub dopplers: Vec<f64>,
}

impl AmbiguityGrid {
    /// 33 delays spanning +-25 % of the pulse and 17 Doppler shifts
    /// spanning +-10 % of one sub-band.
    pub fn standard(pulse: &BasebandSignal, subbands: usize) -> Self {
        let max_delay = 0.25 * pulse.duration();
        let max_doppler = 0.1 * pulse.sample_rate / subbands as f64;
        Self {
            delays: linspace(-max_delay, max_delay, 33),
            dopplers: linspace(-max_doppler, max_doppler, 17),
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `max |chi|^2 / (E1 E2)` over the grid.
pub fn peak_normalized_ambiguity(
    w1: &BasebandSignal,
    w2: &BasebandSignal,
    delays: &[f64],
    dopplers: &[f64],
) -> Result<f64, WaveformError> {
    let norm = w1.energy() * w2.energy();
    let mut peak = 0.0f64;
    for &tau in delays {
        for &f0 in dopplers {
            peak = peak.max(cross_ambiguity(w1, w2, tau, f0)?.norm_sqr() / norm);
        }
    }
    Ok(peak)
}

/// Near-orthogonality test: peak normalized cross-ambiguity `<= eps`.
pub fn epsilon_orthogonal(
    w1: &BasebandSignal,
    w2: &BasebandSignal,
    eps: f64,
    delays: &[f64],
    dopplers: &[f64],
) -> Result<bool, WaveformError> {
    Ok(peak_normalized_ambiguity(w1, w2, delays, dopplers)? <= eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: usize, m: &[usize]) -> SubbandSet {
        SubbandSet::new(s, m.iter().copied()).unwrap()
    }

    // every run, scanned independently of the implementation
    fn runs(members: &[usize]) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for &m in members {
            match out.last_mut() {
                Some(r) if *r.last().unwrap() + 1 == m => r.push(m),
                _ => out.push(vec![m]),
            }
        }
        out
    }

    #[test]
    fn max_block_examples() {
        let got = max_contiguous_block(&set(4, &[1, 3, 4])).unwrap();
        let oracle = runs(&[1, 3, 4]).into_iter().max_by_key(|r| r.len()).unwrap();
        assert_eq!(got, set(4, &oracle));
        assert_eq!(got, set(4, &[3, 4]));
        assert_eq!(max_contiguous_block(&set(4, &[1, 2, 3, 4])).unwrap(), set(4, &[1, 2, 3, 4]));
        assert_eq!(max_contiguous_block(&set(4, &[2, 3, 4])).unwrap(), set(4, &[2, 3, 4]));
    }

    #[test]
    fn max_block_ties_go_low() {
        assert_eq!(max_contiguous_block(&set(6, &[1, 2, 4, 5])).unwrap(), set(6, &[1, 2]));
        assert!(matches!(max_contiguous_block(&set(4, &[])), Err(WaveformError::Empty)));
    }

    #[test]
    fn library_for_four_subbands() {
        let lib = build_library(4).unwrap();
        let expect: [&[usize]; 5] = [&[2, 3, 4], &[3, 4], &[1, 2], &[1, 2, 3], &[1, 2, 3, 4]];
        assert_eq!(lib.len(), 5);
        for (w, e) in lib.iter().zip(expect) {
            assert_eq!(w.occupied, set(4, e), "waveform {}", w.index);
        }
        assert_eq!(lib[1].bandwidth_fraction(), 0.5);
    }

    #[test]
    fn library_for_two_subbands() {
        let lib = build_library(2).unwrap();
        let got: Vec<Vec<usize>> = lib.iter().map(|w| w.occupied.members().iter().copied().collect()).collect();
        assert_eq!(got, vec![vec![2], vec![1], vec![1, 2]]);
    }

    #[test]
    fn library_invariants_for_all_even_counts() {
        for s in (2..=MAX_SUBBANDS).step_by(2) {
            let lib = build_library(s).unwrap();
            assert_eq!(lib.len(), s + 1);
            assert_eq!(lib.iter().filter(|w| w.is_full_band()).count(), 1);
            for w in &lib[..s] {
                assert!(!w.occupied.contains(w.index));
                assert!(w.occupied.is_contiguous());
            }
        }
    }

    #[test]
    fn library_rejects_bad_counts() {
        for s in [0, 1, 3, 18] {
            assert!(build_library(s).is_err());
        }
    }

    #[test]
    fn synthesized_energy_and_parseval() {
        for w in build_library(4).unwrap() {
            let sig = synthesize(&w, 20e6, 256).unwrap();
            assert!((sig.energy() - 1.0).abs() < 1e-9);
            assert!((sig.energy() - sig.spectral_energy()).abs() < 1e-9);
        }
        assert!(synthesize(&build_library(4).unwrap()[0], 20e6, 100).is_err());
        assert!(synthesize(&build_library(4).unwrap()[0], 20e6, 32).is_err());
    }

    fn occupied_bins(sig: &BasebandSignal) -> BTreeSet<usize> {
        let peak = sig.spectrum().iter().map(|c| c.norm()).fold(0.0, f64::max);
        sig.spectrum()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-9 * peak)
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn disjoint_specs_have_disjoint_spectra() {
        let lib = build_library(4).unwrap();
        let a = occupied_bins(&synthesize(&lib[1], 20e6, 256).unwrap());
        let b = occupied_bins(&synthesize(&lib[2], 20e6, 256).unwrap());
        assert!(!a.is_empty() && !b.is_empty());
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn spectral_support_stays_in_occupied_subbands() {
        let n = 256;
        for w in build_library(4).unwrap() {
            let sig = synthesize(&w, 20e6, n).unwrap();
            for bin in occupied_bins(&sig) {
                let centered = (bin + n / 2) % n;
                let k = centered / (n / 4) + 1;
                assert!(w.occupied.contains(k), "bin {bin} of waveform {} in sub-band {k}", w.index);
            }
        }
    }

    #[test]
    fn self_ambiguity_at_origin_is_energy() {
        let w = synthesize(&build_library(4).unwrap()[0], 20e6, 128).unwrap();
        let chi = cross_ambiguity(&w, &w, 0.0, 0.0).unwrap();
        assert!((chi.re - w.energy()).abs() < 1e-12);
        assert!(chi.im.abs() < 1e-12);
        assert!(!epsilon_orthogonal(&w, &w, 0.5, &[0.0], &[0.0]).unwrap());
    }

    #[test]
    fn cauchy_schwarz_and_swap_symmetry() {
        let lib = build_library(4).unwrap();
        let a = synthesize(&lib[0], 20e6, 128).unwrap();
        let b = synthesize(&lib[3], 20e6, 128).unwrap();
        let grid = AmbiguityGrid::standard(&a, 4);
        let bound = (a.energy() * b.energy()).sqrt();
        for &tau in &grid.delays {
            for &f0 in &grid.dopplers {
                let ab = cross_ambiguity(&a, &b, tau, f0).unwrap().norm();
                let ba = cross_ambiguity(&b, &a, -tau, -f0).unwrap().norm();
                assert!(ab <= bound + 1e-12);
                assert!((ab - ba).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rate_mismatch_is_rejected() {
        let lib = build_library(4).unwrap();
        let a = synthesize(&lib[0], 20e6, 64).unwrap();
        let b = synthesize(&lib[0], 10e6, 64).unwrap();
        assert!(matches!(cross_ambiguity(&a, &b, 0.0, 0.0), Err(WaveformError::RateMismatch(..))));
    }

    #[test]
    fn disjoint_pair_is_orthogonal_at_origin() {
        let lib = build_library(4).unwrap();
        let a = synthesize(&lib[1], 20e6, 256).unwrap();
        let b = synthesize(&lib[2], 20e6, 256).unwrap();
        let chi = cross_ambiguity(&a, &b, 0.0, 0.0).unwrap();
        assert!(chi.norm_sqr() / (a.energy() * b.energy()) <= 0.05);
    }

    #[test]
    fn overlap_fails_orthogonality() {
        let lib = build_library(4).unwrap();
        let a = synthesize(&lib[3], 20e6, 256).unwrap();
        let b = synthesize(&lib[4], 20e6, 256).unwrap();
        let grid = AmbiguityGrid::standard(&a, 4);
        assert!(!epsilon_orthogonal(&a, &b, 0.05, &grid.delays, &grid.dopplers).unwrap());
        // shared tones give |chi|^2 = |H4| / |H5| at the origin
        let chi = cross_ambiguity(&a, &b, 0.0, 0.0).unwrap();
        assert!((chi.norm_sqr() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn dump_layout() {
        let sig = synthesize(&build_library(4).unwrap()[4], 20e6, 64).unwrap();
        let mut buf = Vec::new();
        sig.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 64 * 16);
        assert_eq!(&buf[..4], b"WVFM");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 64);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 20_000_000);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), sig.samples[0].re);
        let back = BasebandSignal::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, sig);
        assert!(BasebandSignal::read_dump(&b"XXXX\0\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
    }
}
