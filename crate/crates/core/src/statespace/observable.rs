use super::JointState;
use crate::error::{Error, Result};
use crate::C64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Arm {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Motional {
    Ground,
    Excited,
    In,
    Out,
}

impl Motional {
    /// Unit vector in the `{|0>, |1>}` basis.
    pub fn vector(self) -> [f64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Motional::Ground => [1.0, 0.0],
            Motional::Excited => [0.0, 1.0],
            Motional::In => [h, -h],
            Motional::Out => [h, h],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Observable {
    Identity,
    ProjectorArm(Arm),
    ProjectorJoint(Arm, Motional),
    Hph,
    Hm,
    HphRestricted(Arm),
    HmRestricted(Arm),
}

/// Photon-bomb amplitudes in all four `(arm, motional)` sectors. The
/// physical dynamics never populate arm II with `|1>`, but post-selected
/// bra states can.
#[derive(Debug, Clone, PartialEq)]
pub struct Sectors {
    pub i0: Vec<C64>,
    pub i1: Vec<C64>,
    pub ii0: Vec<C64>,
    pub ii1: Vec<C64>,
}

impl Sectors {
    pub fn zeros(n: usize) -> Self {
        let z = vec![C64::default(); n];
        Self {
            i0: z.clone(),
            i1: z.clone(),
            ii0: z.clone(),
            ii1: z,
        }
    }

    pub fn len(&self) -> usize {
        self.i0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i0.is_empty()
    }

    fn arm(&self, arm: Arm) -> (&[C64], &[C64]) {
        match arm {
            Arm::I => (&self.i0, &self.i1),
            Arm::II => (&self.ii0, &self.ii1),
        }
    }

    fn arm_mut(&mut self, arm: Arm) -> (&mut Vec<C64>, &mut Vec<C64>) {
        match arm {
            Arm::I => (&mut self.i0, &mut self.i1),
            Arm::II => (&mut self.ii0, &mut self.ii1),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Sectors) -> C64 {
        let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
        dot(&self.i0, &other.i0)
            + dot(&self.i1, &other.i1)
            + dot(&self.ii0, &other.ii0)
            + dot(&self.ii1, &other.ii1)
    }
}

impl From<&JointState> for Sectors {
    fn from(s: &JointState) -> Self {
        Self {
            i0: s.psi0.clone(),
            i1: s.psi1.clone(),
            ii0: s.beta.clone(),
            ii1: vec![C64::default(); s.beta.len()],
        }
    }
}

impl Observable {
    /// The ten observables plotted against time for the dark-port ensemble.
    pub fn default_set() -> Vec<Observable> {
        use Arm::*;
        use Motional::*;
        vec![
            Observable::ProjectorJoint(I, Ground),
            Observable::ProjectorJoint(I, Excited),
            Observable::ProjectorJoint(II, Ground),
            Observable::ProjectorArm(I),
            Observable::ProjectorArm(II),
            Observable::Hm,
            Observable::HmRestricted(I),
            Observable::HmRestricted(II),
            Observable::HphRestricted(I),
            Observable::HphRestricted(II),
        ]
    }

    /// Every observable with a closed-form counterpart.
    pub fn full_set() -> Vec<Observable> {
        use Arm::*;
        use Motional::*;
        let mut v = Vec::new();
        for arm in [I, II] {
            for m in [In, Out, Ground, Excited] {
                v.push(Observable::ProjectorJoint(arm, m));
            }
        }
        v.extend([
            Observable::ProjectorArm(I),
            Observable::ProjectorArm(II),
            Observable::Hm,
            Observable::HmRestricted(I),
            Observable::HmRestricted(II),
            Observable::HphRestricted(I),
            Observable::HphRestricted(II),
            Observable::Hph,
            Observable::Identity,
        ]);
        v
    }

    pub fn is_projector(self) -> bool {
        matches!(
            self,
            Observable::ProjectorArm(_) | Observable::ProjectorJoint(..)
        )
    }

    /// Spectral range `[min, max]` used to flag anomalous weak values.
    pub fn spectral_range(self, omega_max: f64, omega_m: f64) -> (f64, f64) {
        match self {
            Observable::Identity => (1.0, 1.0),
            Observable::ProjectorArm(_) | Observable::ProjectorJoint(..) => (0.0, 1.0),
            Observable::Hph | Observable::HphRestricted(_) => (0.0, omega_max),
            Observable::Hm | Observable::HmRestricted(_) => (0.0, omega_m),
        }
    }

    /// Applies the operator to `s`; `omegas` are the photon frequencies.
    pub fn apply(self, s: &Sectors, omegas: &[f64], omega_m: f64) -> Sectors {
        let n = s.len();
        let mut out = Sectors::zeros(n);
        let copy_arm = |out: &mut Sectors, arm: Arm, f: &dyn Fn(usize, C64, C64) -> (C64, C64)| {
            let (x0, x1) = s.arm(arm);
            let (y0, y1) = out.arm_mut(arm);
            for j in 0..n {
                let (a, b) = f(j, x0[j], x1[j]);
                y0[j] = a;
                y1[j] = b;
            }
        };
        let arms = |restrict: Option<Arm>| -> Vec<Arm> {
            match restrict {
                Some(a) => vec![a],
                None => vec![Arm::I, Arm::II],
            }
        };
        match self {
            Observable::Identity => return s.clone(),
            Observable::ProjectorArm(arm) => copy_arm(&mut out, arm, &|_, a, b| (a, b)),
            Observable::ProjectorJoint(arm, m) => {
                let v = m.vector();
                copy_arm(&mut out, arm, &|_, a, b| {
                    let c = a * v[0] + b * v[1];
                    (c * v[0], c * v[1])
                })
            }
            Observable::Hph | Observable::HphRestricted(_) => {
                let restrict = if let Observable::HphRestricted(a) = self {
                    Some(a)
                } else {
                    None
                };
                for arm in arms(restrict) {
                    copy_arm(&mut out, arm, &|j, a, b| (a * omegas[j], b * omegas[j]));
                }
            }
            Observable::Hm | Observable::HmRestricted(_) => {
                let restrict = if let Observable::HmRestricted(a) = self {
                    Some(a)
                } else {
                    None
                };
                for arm in arms(restrict) {
                    copy_arm(&mut out, arm, &|_, _, b| (C64::default(), b * omega_m));
                }
            }
        }
        out
    }

    /// `<s|A|s>` for a joint state.
    pub fn expectation(self, s: &JointState) -> f64 {
        let sec = Sectors::from(s);
        sec.inner(&self.apply(&sec, &s.grid.omegas, s.omega_m())).re
    }
}

fn arm_name(a: Arm) -> &'static str {
    match a {
        Arm::I => "I",
        Arm::II => "II",
    }
}

fn motional_name(m: Motional) -> &'static str {
    match m {
        Motional::Ground => "0",
        Motional::Excited => "1",
        Motional::In => "in",
        Motional::Out => "out",
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Observable::Identity => write!(f, "identity"),
            Observable::ProjectorArm(a) => write!(f, "Pi_{}", arm_name(a)),
            Observable::ProjectorJoint(a, m) => {
                write!(f, "Pi_{}_{}", arm_name(a), motional_name(m))
            }
            Observable::Hph => write!(f, "H_ph"),
            Observable::Hm => write!(f, "H_m"),
            Observable::HphRestricted(a) => write!(f, "H_ph_Pi_{}", arm_name(a)),
            Observable::HmRestricted(a) => write!(f, "H_m_Pi_{}", arm_name(a)),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::full_set()
            .into_iter()
            .find(|o| o.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown observable '{s}'")))
    }
}
