//! First-order radio energy model.
//!
//! A transmitter spends `e_elec` per bit on electronics plus an amplifier
//! term that is free-space (`eps_fs * d^2`) below the crossover distance and
//! multipath (`eps_mp * d^4`) at or above it. Receivers spend electronics only.
//! All quantities are joules, meters and bits.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("a cluster must count at least its own head (members = 0)")]
    EmptyCluster,
    #[error("radio parameter `{name}` must be finite and > 0, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
}

/// Energy constants of the radio model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// TX/RX electronics energy, J/bit.
    pub e_elec: f64,
    /// Free-space amplifier coefficient, J/bit/m^2.
    pub eps_fs: f64,
    /// Multipath amplifier coefficient, J/bit/m^4.
    pub eps_mp: f64,
    /// Data aggregation energy, J/bit/signal.
    pub e_da: f64,
    /// Hard-coded crossover distance. `None` derives it from the amplifier
    /// coefficients.
    pub threshold_override: Option<f64>,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl RadioParams {
    /// LEACH reference constants: 50 nJ/bit electronics, 10 pJ/bit/m^2 free
    /// space, 0.0013 pJ/bit/m^4 multipath, 5 nJ/bit/signal aggregation.
    pub const fn reference() -> Self {
        Self {
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_da: 5e-9,
            threshold_override: None,
        }
    }

    pub const fn with_e_elec(mut self, e_elec: f64) -> Self {
        self.e_elec = e_elec;
        self
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        let fields = [
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("e_da", self.e_da),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(RadioError::InvalidParam { name, value });
            }
        }
        if let Some(d) = self.threshold_override {
            if !(d.is_finite() && d > 0.0) {
                return Err(RadioError::InvalidParam {
                    name: "threshold_override",
                    value: d,
                });
            }
        }
        Ok(())
    }

    /// Crossover distance `sqrt(eps_fs / eps_mp)`, or the override if set.
    pub fn distance_threshold(&self) -> f64 {
        self.threshold_override
            .unwrap_or_else(|| (self.eps_fs / self.eps_mp).sqrt())
    }

    /// Transmit cost without input checks. Callers guarantee `distance >= 0`.
    pub(crate) fn tx_unchecked(&self, bits: u64, distance: f64) -> f64 {
        let k = bits as f64;
        if distance < self.distance_threshold() {
            k * self.e_elec + k * self.eps_fs * distance * distance
        } else {
            k * self.e_elec + k * self.eps_mp * distance.powi(4)
        }
    }

    pub(crate) fn rx_unchecked(&self, bits: u64) -> f64 {
        bits as f64 * self.e_elec
    }

    pub(crate) fn ch_round_unchecked(&self, bits: u64, members: u64, d_to_bs: f64) -> f64 {
        let k = bits as f64;
        let m = members as f64;
        k * self.e_elec * (m - 1.0) + k * self.e_da * m + self.tx_unchecked(bits, d_to_bs)
    }
}

fn check_distance(distance: f64) -> Result<(), RadioError> {
    if distance.is_finite() && distance >= 0.0 {
        Ok(())
    } else {
        Err(RadioError::InvalidDistance(distance))
    }
}

/// Crossover distance between the free-space and multipath regimes.
pub fn distance_threshold(params: &RadioParams) -> f64 {
    params.distance_threshold()
}

/// Energy to transmit `bits` over `distance` meters.
///
/// Distances strictly below the crossover use the free-space amplifier.
pub fn tx_energy(bits: u64, distance: f64, params: &RadioParams) -> Result<f64, RadioError> {
    check_distance(distance)?;
    Ok(params.tx_unchecked(bits, distance))
}

/// Energy to receive `bits`.
pub fn rx_energy(bits: u64, params: &RadioParams) -> f64 {
    params.rx_unchecked(bits)
}

/// One round of cluster-head work: receive from `members - 1` nodes,
/// aggregate `members` signals (own included) and forward one message.
pub fn ch_round_energy(
    bits: u64,
    members: u64,
    d_to_bs: f64,
    params: &RadioParams,
) -> Result<f64, RadioError> {
    if members == 0 {
        return Err(RadioError::EmptyCluster);
    }
    check_distance(d_to_bs)?;
    Ok(params.ch_round_unchecked(bits, members, d_to_bs))
}

/// One round of member work: a single message to its cluster head.
pub fn non_ch_round_energy(bits: u64, d_to_ch: f64, params: &RadioParams) -> Result<f64, RadioError> {
    tx_energy(bits, d_to_ch, params)
}
