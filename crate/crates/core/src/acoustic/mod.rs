//! Low-bandwidth acoustic command channel.

mod frame;
mod link;

pub use frame::{
    decode_frame, encode_frame, AcousticCommand, CodecError, Frame, FrameKind, MAX_FRAME, MAX_PAYLOAD,
};
pub use link::{
    transmit, AcousticLink, ChannelModel, Delivery, LinkError, LinkOutput, TransferOutcome, TransmitReport,
    MAX_RETRIES,
};
