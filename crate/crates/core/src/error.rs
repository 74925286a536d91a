use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("point ({x}, {y}) is not on a face")]
    NotOnFace { x: f64, y: f64 },
    #[error("point ({x}, {y}, {z}) is not on the cube surface")]
    NotOnSurface { x: f64, y: f64, z: f64 },
    #[error("degenerate direction")]
    DegenerateDirection,
    #[error("degenerate transport: transported sphere point collapses onto the origin")]
    DegenerateTransport,
    #[error("block at ({x0}, {y0}) size {width}x{height} does not lie within a single face")]
    BlockStraddlesFaces {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid center MV ({dx}, {dy}): block center leaves the faces")]
    InvalidCenterMv { dx: i32, dy: i32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no valid motion")]
    NoValidMotion,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("file size {size} is not a multiple of the frame size {frame_size}")]
    SizeMismatch { size: u64, frame_size: u64 },
    #[error("zero POC distance for MV scaling")]
    ZeroPocDistance,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
