//! Decode-at-relay physical-layer network coding over asynchronous two-user
//! multiple-access channels.

pub mod error;
pub mod gfcode;
pub mod ldpc;
pub mod macchannel;
pub mod detector;
pub mod jointdec;
pub mod framesync;
pub mod sim;

pub use error::{Error, Result};
