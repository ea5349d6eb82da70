use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::{rat, sign, zero, Rational};

use super::{bit, AnyBox, Box2, Box3, ConstraintSet};

/// Boxes that ship with the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Class3,
    Class4,
    Class44,
    Pr,
    /// Tripartite deterministic box; each entry is a 2-bit strategy table.
    Deterministic([u8; 3]),
    /// Bipartite deterministic box.
    Deterministic2([u8; 2]),
    Uniform3,
    Uniform2,
}

impl Builtin {
    pub fn build(self) -> AnyBox {
        match self {
            Builtin::Class3 => AnyBox::Three(class3()),
            Builtin::Class4 => AnyBox::Three(class4()),
            Builtin::Class44 => AnyBox::Three(class44()),
            Builtin::Pr => AnyBox::Two(pr_box()),
            Builtin::Deterministic(s) => AnyBox::Three(Box3::deterministic(s)),
            Builtin::Deterministic2(s) => AnyBox::Two(Box2::deterministic(s)),
            Builtin::Uniform3 => AnyBox::Three(Box3::uniform()),
            Builtin::Uniform2 => AnyBox::Two(Box2::uniform()),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `class3`, `class4`, `class44`, `pr`, `uniform3`, `uniform2`,
    /// `deterministic(sA,sB,sC)` and `deterministic(sA,sB)`.
    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_ascii_lowercase();
        let fixed = match name.as_str() {
            "class3" => Some(Builtin::Class3),
            "class4" => Some(Builtin::Class4),
            "class44" => Some(Builtin::Class44),
            "pr" => Some(Builtin::Pr),
            "uniform3" => Some(Builtin::Uniform3),
            "uniform2" => Some(Builtin::Uniform2),
            _ => None,
        };
        if let Some(b) = fixed {
            return Ok(b);
        }
        let unknown = || Error::UnknownBuiltin(s.to_string());
        let args = name
            .strip_prefix("deterministic(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(unknown)?;
        let strategies = args
            .split(',')
            .map(|a| a.trim().parse::<u8>().ok().filter(|&v| v < 4))
            .collect::<Option<Vec<u8>>>()
            .ok_or_else(unknown)?;
        match strategies[..] {
            [a, b, c] => Ok(Builtin::Deterministic([a, b, c])),
            [a, b] => Ok(Builtin::Deterministic2([a, b])),
            _ => Err(unknown()),
        }
    }
}

pub fn builtin(name: &str) -> Result<AnyBox> {
    Ok(name.parse::<Builtin>()?.build())
}

/// Representative of extremal class #3:
/// `P = 1/8 [1 + (-1)^{a+b} d(x,0) + (-1)^{a+c} d(x,1) d(z,0)
///          + (-1)^{a+b+c} d(x,1) (d(y,0) - d(y,1)) d(z,1)]`.
pub fn class3() -> Box3 {
    Box3::from_fn(|inputs, outputs| {
        let (x, y, z) = (bit(inputs, 0, 3), bit(inputs, 1, 3), bit(inputs, 2, 3));
        let (a, b, c) = (bit(outputs, 0, 3), bit(outputs, 1, 3), bit(outputs, 2, 3));
        let mut p = rat(1, 1);
        if x == 0 {
            p += sign(a ^ b);
        } else if z == 0 {
            p += sign(a ^ c);
        } else {
            p += sign(a ^ b ^ c) * sign(y);
        }
        p * rat(1, 8)
    })
}

/// Representative of class #4, the completion of [`ConstraintSet::class4`].
pub fn class4() -> Box3 {
    ConstraintSet::class4()
        .build()
        .expect("class 4 relations are consistent")
}

/// Class #44: uniform over outputs with `a ^ b ^ c == x & y & z`.
pub fn class44() -> Box3 {
    Box3::from_fn(|inputs, outputs| parity_box(inputs == 0b111, outputs, rat(1, 4)))
}

/// Popescu-Rohrlich box: uniform over `a' ^ b' == x' & y'`.
pub fn pr_box() -> Box2 {
    Box2::from_fn(|inputs, outputs| parity_box(inputs == 0b11, outputs, rat(1, 2)))
}

fn parity_box(target: bool, outputs: usize, p: Rational) -> Rational {
    if (outputs.count_ones() % 2 == 1) == target {
        p
    } else {
        zero()
    }
}
