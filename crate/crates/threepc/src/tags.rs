//! Message-type tags carried in frame headers.

pub const BEAVER_C1: u8 = 0x01;
pub const BEAVER_E: u8 = 0x02;
pub const BEAVER_F: u8 = 0x03;
pub const SC_ATILDE: u8 = 0x10;
pub const SC_XBITS: u8 = 0x11;
pub const SC_DELTA: u8 = 0x12;
pub const SC_ETA: u8 = 0x13;
pub const PC_C: u8 = 0x14;
pub const MSB_XBITS: u8 = 0x20;
pub const MSB_XLSB: u8 = 0x21;
pub const MSB_R: u8 = 0x22;
pub const MSB_BETA: u8 = 0x23;
pub const REVEAL: u8 = 0x30;
