use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{terminal_state, FirstOrderSystem, Tolerance};

/// Residues with magnitude below this count as positive.
pub const ZERO_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidueStatus {
    Ok,
    Blowup,
}

/// Value of the shooting map, (u(1), v(1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    pub u1: f64,
    pub v1: f64,
    pub status: ResidueStatus,
}

impl Residue {
    pub fn ok(u1: f64, v1: f64) -> Self {
        Residue {
            u1,
            v1,
            status: ResidueStatus::Ok,
        }
    }

    /// max(|u(1)|, |v(1)|), infinite for blown-up shots.
    pub fn max_abs(&self) -> f64 {
        match self.status {
            ResidueStatus::Ok => self.u1.abs().max(self.v1.abs()),
            ResidueStatus::Blowup => f64::INFINITY,
        }
    }

    pub fn quadrant(&self) -> Quadrant {
        classify(self)
    }
}

/// Sign quadrant of a residue pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrant {
    /// u(1) > 0, v(1) > 0
    Green,
    /// u(1) > 0, v(1) < 0
    Yellow,
    /// u(1) < 0, v(1) > 0
    Blue,
    /// u(1) < 0, v(1) < 0
    Red,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Green, Quadrant::Yellow, Quadrant::Blue, Quadrant::Red];

    pub fn name(&self) -> &'static str {
        match self {
            Quadrant::Green => "green",
            Quadrant::Yellow => "yellow",
            Quadrant::Blue => "blue",
            Quadrant::Red => "red",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Quadrant::ALL.into_iter().find(|q| q.name() == name)
    }

    pub(crate) fn bit(&self) -> u8 {
        match self {
            Quadrant::Green => 1,
            Quadrant::Yellow => 2,
            Quadrant::Blue => 4,
            Quadrant::Red => 8,
        }
    }
}

#[inline]
fn positive(t: f64) -> bool {
    t > -ZERO_GUARD
}

pub fn classify(res: &Residue) -> Quadrant {
    match (positive(res.u1), positive(res.v1)) {
        (true, true) => Quadrant::Green,
        (true, false) => Quadrant::Yellow,
        (false, true) => Quadrant::Blue,
        (false, false) => Quadrant::Red,
    }
}

/// The shooting map: integrates from slopes (du0, dv0) and returns
/// (u(1), v(1)). A solve that blows up is reported with the signs of u and v
/// at the last accepted step.
pub fn shoot<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
) -> Result<Residue> {
    match terminal_state(sys, du0, dv0, tol) {
        Ok(end) => Ok(Residue::ok(end.state[0], end.state[1])),
        Err(Error::Integration(fail)) => {
            let [u, v, _, _] = fail.state;
            if u.is_finite() && v.is_finite() {
                Ok(Residue {
                    u1: u,
                    v1: v,
                    status: ResidueStatus::Blowup,
                })
            } else {
                Err(Error::Integration(fail))
            }
        }
        Err(e) => Err(e),
    }
}

/// [`shoot`] made total for grid scans: a shot whose signs cannot be
/// inferred is reported as a blow-up with NaN residues (classified red).
pub(crate) fn shoot_total<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
) -> Residue {
    shoot(sys, du0, dv0, tol).unwrap_or(Residue {
        u1: f64::NAN,
        v1: f64::NAN,
        status: ResidueStatus::Blowup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legend() {
        assert_eq!(classify(&Residue::ok(0.5, 0.2)), Quadrant::Green);
        assert_eq!(classify(&Residue::ok(0.5, -0.2)), Quadrant::Yellow);
        assert_eq!(classify(&Residue::ok(-0.5, 0.2)), Quadrant::Blue);
        assert_eq!(classify(&Residue::ok(-0.5, -0.2)), Quadrant::Red);
    }

    #[test]
    fn zero_counts_as_positive() {
        assert_eq!(classify(&Residue::ok(0.0, 0.0)), Quadrant::Green);
        assert_eq!(classify(&Residue::ok(-5e-15, 3e-15)), Quadrant::Green);
        assert_eq!(classify(&Residue::ok(-2e-14, 0.0)), Quadrant::Blue);
    }

    #[test]
    fn names_round_trip() {
        for q in Quadrant::ALL {
            assert_eq!(Quadrant::from_name(q.name()), Some(q));
        }
        assert_eq!(Quadrant::from_name("purple"), None);
    }
}
