//! A node's joint (band, waveform) learner.

use rand::Rng;

use super::{
    BandPolicy, BandPolicyKind, BanditError, EpsilonPolicy, Feedback, MCTopM, MusicalChairs, SaaPolicy,
    WaveformPolicy, WaveformPolicyKind,
};

/// Band and waveform indices chosen for one PRI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionPair {
    pub band: usize,
    pub waveform: usize,
}

/// Parameters shared by every node's learners.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub band: BandPolicyKind,
    pub waveform: WaveformPolicyKind,
    pub epsilon: f64,
    pub decay_exponent: f64,
    pub mc_epsilon: f64,
    pub mc_delta: f64,
    /// Band used by `fixed` band policy, indexed by node.
    pub fixed_bands: Vec<usize>,
    /// Waveform used by `fixed` waveform policy; `None` means full band.
    pub fixed_waveform: Option<usize>,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            band: BandPolicyKind::MCTopM,
            waveform: WaveformPolicyKind::EpsDecaying,
            epsilon: 0.1,
            decay_exponent: 0.8,
            mc_epsilon: 0.1,
            mc_delta: 0.05,
            fixed_bands: Vec::new(),
            fixed_waveform: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoLevelNode {
    band: BandPolicy,
    waveforms: Vec<WaveformPolicy>,
    last: Option<ActionPair>,
}

impl TwoLevelNode {
    /// Build the learner of node `node` among `m` nodes sharing `bands`
    /// bands with `waveforms` waveforms each.
    pub fn new(params: &PolicyParams, node: usize, m: usize, bands: usize, waveforms: usize) -> Result<Self, BanditError> {
        if bands == 0 || waveforms == 0 {
            return Err(BanditError::NoArms);
        }
        let band = match params.band {
            BandPolicyKind::Fixed => {
                let arm = params.fixed_bands.get(node).copied().unwrap_or(node);
                if arm >= bands {
                    return Err(BanditError::FixedArm { arm, arms: bands });
                }
                BandPolicy::Fixed(arm)
            }
            BandPolicyKind::Saa => BandPolicy::Saa(SaaPolicy::new(bands, false)),
            BandPolicyKind::MusicalChairs => {
                BandPolicy::MusicalChairs(MusicalChairs::with_params(bands, m, params.mc_epsilon, params.mc_delta)?)
            }
            BandPolicyKind::MCTopM => BandPolicy::MCTopM(MCTopM::new(bands, m)),
        };
        let make = || -> Result<WaveformPolicy, BanditError> {
            Ok(match params.waveform {
                WaveformPolicyKind::Fixed => {
                    let arm = params.fixed_waveform.unwrap_or(waveforms - 1);
                    if arm >= waveforms {
                        return Err(BanditError::FixedArm { arm, arms: waveforms });
                    }
                    WaveformPolicy::Fixed(arm)
                }
                WaveformPolicyKind::Saa => WaveformPolicy::Saa(SaaPolicy::new(waveforms, true)),
                WaveformPolicyKind::EpsGreedy => WaveformPolicy::Epsilon(EpsilonPolicy::constant(waveforms, params.epsilon)?),
                WaveformPolicyKind::EpsDecaying => {
                    WaveformPolicy::Epsilon(EpsilonPolicy::decaying(waveforms, params.decay_exponent)?)
                }
            })
        };
        let waveforms = (0..bands).map(|_| make()).collect::<Result<_, _>>()?;
        Ok(Self { band, waveforms, last: None })
    }

    /// Assemble from explicit parts, one waveform learner per band.
    pub fn from_parts(band: BandPolicy, waveforms: Vec<WaveformPolicy>) -> Self {
        Self { band, waveforms, last: None }
    }

    pub fn select<R: Rng + ?Sized, S: Rng + ?Sized>(&mut self, band_rng: &mut R, wf_rng: &mut S) -> ActionPair {
        let band = self.band.select(band_rng);
        let waveform = self.waveforms[band].select(wf_rng);
        let pair = ActionPair { band, waveform };
        self.last = Some(pair);
        pair
    }

    /// Route feedback for the last selected pair. A collided band hands its
    /// waveform learner a zero reward.
    pub fn observe(&mut self, fb: &Feedback) {
        let pair = self.last.expect("observe before select");
        self.band.observe(pair.band, fb);
        let wf_fb = if fb.collided { Feedback { reward: 0.0, ..*fb } } else { *fb };
        self.waveforms[pair.band].observe(pair.waveform, &wf_fb);
    }

    pub fn band_policy(&self) -> &BandPolicy {
        &self.band
    }

    pub fn waveform_policy(&self, band: usize) -> &WaveformPolicy {
        &self.waveforms[band]
    }

    pub fn last(&self) -> Option<ActionPair> {
        self.last
    }
}
