pub mod engine;
pub mod explain;
pub mod rulelang;
pub mod npp_kb;
pub mod oracle;
pub mod replay;
pub mod scenario;
