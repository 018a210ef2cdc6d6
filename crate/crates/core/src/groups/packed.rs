//! Injective `u64` encodings of group elements.
//!
//! Measures and breadth-first searches touch millions of elements, so they
//! store keys instead of [`GroupElement`] values. Every family packs into a
//! fixed bit layout; elements outside the layout's range yield `None`, which
//! callers surface as a budget error.
//!
//! | family          | layout                                                    |
//! |-----------------|-----------------------------------------------------------|
//! | free-abelian(d) | d biased fields of `64 / d` bits (d <= 16)                |
//! | heisenberg      | a: 20 bits, b: 20 bits, c: 24 bits, all biased            |
//! | free(k)         | letters from bit 0, `ceil(log2 2k)` bits each; length in bits 58..64 |
//! | lamplighter     | lamp mask for positions [-28, 28) in bits 0..56; cursor biased in 56..64 |
//! | cyclic(N)       | the residue                                               |

use super::{GroupElement, GroupModel};
use crate::error::{Error, Result};

const HEIS_A_BITS: u32 = 20;
const HEIS_B_BITS: u32 = 20;
const HEIS_C_BITS: u32 = 24;

const FREE_LEN_SHIFT: u32 = 58;

const LAMP_WINDOW: u32 = 56;
const LAMP_ORIGIN: i64 = 28;
const CURSOR_BITS: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Codec {
    Abelian { rank: usize, width: u32 },
    Heisenberg,
    Free { width: u32, max_len: u32 },
    Lamplighter,
    Cyclic { order: u64 },
}

#[inline]
fn field_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[inline]
fn encode_biased(v: i64, width: u32) -> Option<u64> {
    let bias = 1i128 << (width - 1);
    let shifted = v as i128 + bias;
    if shifted < 0 || shifted >= (1i128 << width) {
        None
    } else {
        Some(shifted as u64)
    }
}

#[inline]
fn decode_biased(raw: u64, width: u32) -> i64 {
    let bias = 1i128 << (width - 1);
    (raw as i128 - bias) as i64
}

impl Codec {
    pub(crate) fn new(model: &GroupModel) -> Result<Self> {
        Ok(match *model {
            GroupModel::FreeAbelian(rank) => {
                if rank == 0 || rank > 16 {
                    return Err(Error::UnsupportedFamily {
                        family: model.to_string(),
                        operation: "packed measures (rank must be 1..=16)".into(),
                    });
                }
                Codec::Abelian {
                    rank,
                    width: 64 / rank as u32,
                }
            }
            GroupModel::Heisenberg => Codec::Heisenberg,
            GroupModel::Free(rank) => {
                let letters = 2 * rank as u64;
                let width = (64 - (letters - 1).leading_zeros()).max(1);
                Codec::Free {
                    width,
                    max_len: (FREE_LEN_SHIFT / width).min(63),
                }
            }
            GroupModel::Lamplighter => Codec::Lamplighter,
            GroupModel::Cyclic(order) => Codec::Cyclic { order },
        })
    }

    pub(crate) fn pack(&self, g: &GroupElement) -> Option<u64> {
        match (self, g) {
            (Codec::Abelian { rank, width }, GroupElement::Vector(v)) if v.len() == *rank => {
                let mut key = 0u64;
                for (i, &x) in v.iter().enumerate() {
                    let f = encode_biased(x, *width)?;
                    key |= f << (i as u32 * width);
                }
                Some(key)
            }
            (Codec::Heisenberg, GroupElement::Heisenberg(a, b, c)) => {
                let a = encode_biased(*a, HEIS_A_BITS)?;
                let b = encode_biased(*b, HEIS_B_BITS)?;
                let c = encode_biased(*c, HEIS_C_BITS)?;
                Some(a | (b << HEIS_A_BITS) | (c << (HEIS_A_BITS + HEIS_B_BITS)))
            }
            (Codec::Free { width, max_len }, GroupElement::Word(w)) => {
                if w.len() as u32 > *max_len {
                    return None;
                }
                let mut letters = 0u64;
                for (i, &l) in w.iter().enumerate() {
                    letters |= (l as u64) << (i as u32 * width);
                }
                Some(letters | ((w.len() as u64) << FREE_LEN_SHIFT))
            }
            (Codec::Lamplighter, GroupElement::Lamplighter { lamps, cursor }) => {
                let mut mask = 0u64;
                for &p in lamps {
                    let bit = p + LAMP_ORIGIN;
                    if !(0..LAMP_WINDOW as i64).contains(&bit) {
                        return None;
                    }
                    mask |= 1 << bit;
                }
                let c = encode_biased(*cursor, CURSOR_BITS)?;
                Some(mask | (c << LAMP_WINDOW))
            }
            (Codec::Cyclic { order }, GroupElement::Residue(r)) if r < order => Some(*r),
            _ => None,
        }
    }

    pub(crate) fn unpack(&self, key: u64) -> GroupElement {
        match self {
            Codec::Abelian { rank, width } => GroupElement::Vector(
                (0..*rank)
                    .map(|i| decode_biased((key >> (i as u32 * width)) & field_mask(*width), *width))
                    .collect(),
            ),
            Codec::Heisenberg => {
                let (a, b, c) = self.heisenberg_fields(key);
                GroupElement::Heisenberg(a, b, c)
            }
            Codec::Free { width, .. } => {
                let len = (key >> FREE_LEN_SHIFT) as u32;
                let mask = field_mask(*width);
                GroupElement::Word(
                    (0..len)
                        .map(|i| ((key >> (i * width)) & mask) as u8)
                        .collect(),
                )
            }
            Codec::Lamplighter => {
                let mask = key & field_mask(LAMP_WINDOW);
                let lamps = (0..LAMP_WINDOW as i64)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| b - LAMP_ORIGIN)
                    .collect();
                GroupElement::Lamplighter {
                    lamps,
                    cursor: decode_biased(key >> LAMP_WINDOW, CURSOR_BITS),
                }
            }
            Codec::Cyclic { .. } => GroupElement::Residue(key),
        }
    }

    #[inline]
    fn heisenberg_fields(&self, key: u64) -> (i64, i64, i64) {
        (
            decode_biased(key & field_mask(HEIS_A_BITS), HEIS_A_BITS),
            decode_biased((key >> HEIS_A_BITS) & field_mask(HEIS_B_BITS), HEIS_B_BITS),
            decode_biased(key >> (HEIS_A_BITS + HEIS_B_BITS), HEIS_C_BITS),
        )
    }

    /// Product of two packed elements, or `None` if it leaves the packed range.
    #[inline]
    pub(crate) fn mul(&self, a: u64, b: u64) -> Option<u64> {
        match self {
            Codec::Abelian { rank, width } => {
                let mask = field_mask(*width);
                let mut key = 0u64;
                for i in 0..*rank as u32 {
                    let x = decode_biased((a >> (i * width)) & mask, *width);
                    let y = decode_biased((b >> (i * width)) & mask, *width);
                    key |= encode_biased(x.checked_add(y)?, *width)? << (i * width);
                }
                Some(key)
            }
            Codec::Heisenberg => {
                let (a1, b1, c1) = self.heisenberg_fields(a);
                let (a2, b2, c2) = self.heisenberg_fields(b);
                let a = encode_biased(a1 + a2, HEIS_A_BITS)?;
                let b = encode_biased(b1 + b2, HEIS_B_BITS)?;
                let c = encode_biased(c1 + c2 + a1 * b2, HEIS_C_BITS)?;
                Some(a | (b << HEIS_A_BITS) | (c << (HEIS_A_BITS + HEIS_B_BITS)))
            }
            Codec::Free { width, max_len } => {
                let mask = field_mask(*width);
                let letter_mask = field_mask(FREE_LEN_SHIFT);
                let (mut la, mut xa) = ((a >> FREE_LEN_SHIFT) as u32, a & letter_mask);
                let (mut lb, mut xb) = ((b >> FREE_LEN_SHIFT) as u32, b & letter_mask);
                while la > 0 && lb > 0 {
                    let last = (xa >> ((la - 1) * width)) & mask;
                    if last ^ 1 != xb & mask {
                        break;
                    }
                    la -= 1;
                    xa &= !(mask << (la * width));
                    xb >>= width;
                    lb -= 1;
                }
                if la + lb > *max_len {
                    return None;
                }
                Some(xa | (xb << (la * width)) | (((la + lb) as u64) << FREE_LEN_SHIFT))
            }
            Codec::Lamplighter => {
                let window = field_mask(LAMP_WINDOW);
                let (f1, c1) = (a & window, decode_biased(a >> LAMP_WINDOW, CURSOR_BITS));
                let (f2, c2) = (b & window, decode_biased(b >> LAMP_WINDOW, CURSOR_BITS));
                let shifted = if c1 >= 0 {
                    let s = c1 as u32;
                    if s >= LAMP_WINDOW {
                        if f2 != 0 {
                            return None;
                        }
                        0
                    } else {
                        if f2 >> (LAMP_WINDOW - s) != 0 {
                            return None;
                        }
                        f2 << s
                    }
                } else {
                    let s = (-c1) as u32;
                    if s >= LAMP_WINDOW {
                        if f2 != 0 {
                            return None;
                        }
                        0
                    } else {
                        if f2 & field_mask(s) != 0 {
                            return None;
                        }
                        f2 >> s
                    }
                };
                let c = encode_biased(c1 + c2, CURSOR_BITS)?;
                Some((f1 ^ shifted) | (c << LAMP_WINDOW))
            }
            Codec::Cyclic { order } => Some(((a as u128 + b as u128) % *order as u128) as u64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(model: &GroupModel, g: GroupElement) {
        let codec = Codec::new(model).unwrap();
        let key = codec.pack(&g).expect("in range");
        assert_eq!(codec.unpack(key), g);
    }

    #[test]
    fn pack_unpack_each_family() {
        roundtrip(&GroupModel::FreeAbelian(2), GroupElement::Vector(vec![-3, 7]));
        roundtrip(&GroupModel::FreeAbelian(1), GroupElement::Vector(vec![i64::MIN]));
        roundtrip(&GroupModel::Heisenberg, GroupElement::Heisenberg(-5, 4, -1000));
        roundtrip(&GroupModel::Free(2), GroupElement::Word(vec![0, 2, 2, 1]));
        roundtrip(&GroupModel::Free(2), GroupElement::Word(vec![]));
        roundtrip(
            &GroupModel::Lamplighter,
            GroupElement::Lamplighter {
                lamps: vec![-28, 0, 27],
                cursor: -100,
            },
        );
        roundtrip(&GroupModel::Cyclic(12), GroupElement::Residue(11));
    }

    #[test]
    fn out_of_range_is_none() {
        let codec = Codec::new(&GroupModel::Lamplighter).unwrap();
        let far = GroupElement::Lamplighter {
            lamps: vec![28],
            cursor: 0,
        };
        assert_eq!(codec.pack(&far), None);
        let codec = Codec::new(&GroupModel::Free(2)).unwrap();
        assert_eq!(codec.pack(&GroupElement::Word(vec![0; 30])), None);
    }

    #[test]
    fn packed_product_matches_model_product() {
        let models = [
            GroupModel::FreeAbelian(3),
            GroupModel::Heisenberg,
            GroupModel::Free(2),
            GroupModel::Lamplighter,
            GroupModel::Cyclic(7),
        ];
        for model in &models {
            let codec = Codec::new(model).unwrap();
            let ball = model.ball(3, 1_000_000).unwrap();
            for a in &ball.elements {
                for b in ball.elements.iter().step_by(3) {
                    let expected = model.multiply(a, b).unwrap();
                    let got = codec
                        .mul(codec.pack(a).unwrap(), codec.pack(b).unwrap())
                        .unwrap();
                    assert_eq!(codec.unpack(got), expected, "{model}: {a} * {b}");
                }
            }
        }
    }
}
