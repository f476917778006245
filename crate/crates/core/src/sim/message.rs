//! Canonical bit-length accounting for messages.
//!
//! A message is a tag followed by fixed-width fields. The tag takes
//! `max(1, ⌈log2 kinds⌉)` bits where `kinds` is the number of variants of the
//! protocol's message type. Field widths:
//!
//! | field      | range          | width                |
//! |------------|----------------|----------------------|
//! | `id`       | `[0, n)`       | `max(1, ⌈log2 n⌉)`   |
//! | `weight`   | `[0, n·W]`     | `⌈log2 (n·W + 1)⌉`   |
//! | `bounded`  | `[0, max]`     | `⌈log2 (max + 1)⌉`   |
//! | `flag`     | `{0, 1}`       | 1                    |
//!
//! Preorder numbers, subtree sizes minus one, and fragment ids are all
//! encoded as `id` fields.

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("field value {value} exceeds its range maximum {max}")]
    FieldOutOfRange { value: u64, max: u64 },
}

/// Number of bits needed to write any value in `[0, max]`.
pub fn bits_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

/// `⌈log2 n⌉`, the width of a vertex id, never below one bit.
pub fn id_bits(n: usize) -> u32 {
    bits_for(n.saturating_sub(1) as u64).max(1)
}

pub fn tag_bits(kinds: u32) -> u32 {
    bits_for(u64::from(kinds.saturating_sub(1))).max(1)
}

/// Field widths shared by every node of one network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widths {
    n: usize,
    max_weight: u64,
    id: u32,
    weight: u32,
}

impl Widths {
    pub fn new(n: usize, max_weight: u64) -> Self {
        let weight_max = (n as u64).saturating_mul(max_weight);
        Widths { n, max_weight: weight_max, id: id_bits(n), weight: bits_for(weight_max) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }
}

/// Accumulates the encoded length of one message.
pub struct Encoder<'a> {
    widths: &'a Widths,
    bits: u32,
    error: Option<EncodeError>,
}

impl<'a> Encoder<'a> {
    pub fn new(widths: &'a Widths) -> Self {
        Encoder { widths, bits: 0, error: None }
    }

    fn check(&mut self, value: u64, max: u64) {
        if value > max && self.error.is_none() {
            self.error = Some(EncodeError::FieldOutOfRange { value, max });
        }
    }

    pub fn id(&mut self, v: VertexId) -> &mut Self {
        self.check(u64::from(v), self.widths.n.saturating_sub(1) as u64);
        self.bits += self.widths.id;
        self
    }

    pub fn weight(&mut self, w: u64) -> &mut Self {
        self.check(w, self.widths.max_weight);
        self.bits += self.widths.weight;
        self
    }

    pub fn bounded(&mut self, value: u64, max: u64) -> &mut Self {
        self.check(value, max);
        self.bits += bits_for(max);
        self
    }

    pub fn flag(&mut self, _b: bool) -> &mut Self {
        self.bits += 1;
        self
    }

    pub fn finish(self) -> Result<u32, EncodeError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.bits),
        }
    }
}

/// A value that can travel over one channel in one round.
pub trait Message: Copy {
    /// Number of variants, which fixes the tag width.
    const KINDS: u32;

    /// Writes the fields (not the tag) of this message.
    fn encode(&self, enc: &mut Encoder<'_>);
}

/// Exact encoded length of `payload`; `None` (no send) costs nothing.
pub fn message_size<M: Message>(payload: Option<&M>, widths: &Widths) -> Result<u32, EncodeError> {
    match payload {
        None => Ok(0),
        Some(msg) => {
            let mut enc = Encoder::new(widths);
            msg.encode(&mut enc);
            Ok(tag_bits(M::KINDS) + enc.finish()?)
        }
    }
}
