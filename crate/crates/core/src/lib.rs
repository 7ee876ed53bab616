//! Protocol library for verified robot product delivery: DID/verifiable-
//! credential customer verification, PUF-based robot verification, a
//! permissioned DID ledger, and a simulated pub/sub network with an
//! adversary harness.

pub mod cryptokit;
pub mod didledger;
pub mod netbus;
pub mod protocol;
pub mod pufsim;
pub mod scenario;
