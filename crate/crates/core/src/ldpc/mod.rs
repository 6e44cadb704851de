//! Irregular LDPC codes: construction, encoding, sum-product decoding and the
//! iterative detector/decoder loop.

mod code;
mod decode;
mod encode;
mod joint;
mod matrix;

pub use code::{construct_code, CodeSpec, LdpcCode};
pub use decode::{clamp_llr, decode, hard_decision, DecodeResult, LLR_CLAMP};
pub use encode::{encode, Encoder};
pub use joint::{joint_receive, CodedLayout, JointOutput, Schedule};
pub use matrix::SparseParityMatrix;
