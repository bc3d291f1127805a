//! Live coverage service: one [`viewsphere::Session`] per WebSocket
//! connection, JSON text frames in both directions.

pub mod connection;
pub mod protocol;
pub mod server;
pub mod store;

pub use connection::{Connection, Step};
pub use protocol::{ClientMessage, ErrorCode, ServerMessage, PROTOCOL_VERSION};
pub use server::{bind, serve};
pub use store::ReportStore;
