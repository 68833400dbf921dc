//! Live pilot service: a WebSocket endpoint that lets one human pilot run a
//! block in real time against the same tick loop the simulator uses.

mod driver;
pub mod protocol;
mod server;

pub use driver::LiveDriver;
pub use server::{bind, serve, ServeOptions};

#[derive(Debug, thiserror::Error)]
pub enum LiveError {
    #[error(transparent)]
    Core(#[from] forage_core::Error),
    #[error("network error: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs [`serve`] on a fresh multi-threaded runtime, blocking the caller.
pub fn serve_blocking(config: forage_core::SessionConfig, options: ServeOptions) -> Result<(), LiveError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(config, options))
}
