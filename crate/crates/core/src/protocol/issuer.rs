//! Government credential issuer: signs identity credentials whose
//! digests bind the holder's name without ever disclosing it.

use rand::RngCore;

use crate::cryptokit::{
    ecdsa_sign, siphash64, CurveParams, CurvePoint, HashKey128, KeyPair, Timestamp,
};
use crate::didledger::{Did, DidDocument, Ledger, LedgerError};

use super::credential::{CredKind, Credential, GovAttrs};

/// A government issuer holding a signing key and a secret digest key.
pub struct GovIssuer {
    keypair: KeyPair,
    did: Did,
    digest_key: HashKey128,
}

impl GovIssuer {
    pub fn generate<R: RngCore>(rng: &mut R) -> GovIssuer {
        let params = CurveParams::p256();
        let keypair = KeyPair::generate(params, rng);
        let did = Did::derive(&keypair.public(), rng.next_u64());
        let mut key = [0u8; 16];
        rng.fill_bytes(&mut key);
        GovIssuer {
            keypair,
            did,
            digest_key: HashKey128(key),
        }
    }

    pub fn did(&self) -> Did {
        self.did
    }

    pub fn public_key(&self) -> CurvePoint {
        self.keypair.public()
    }

    /// The issuer's ledger document, for seeding a ledger's issuer set.
    pub fn document(&self, now: Timestamp) -> DidDocument {
        DidDocument {
            did: self.did,
            public_key: self.keypair.public(),
            metadata_digest: None,
            created_at: now,
            revoked: false,
        }
    }

    /// Builds a fresh issuer and a ledger that trusts it.
    pub fn bootstrap<R: RngCore>(rng: &mut R, now: Timestamp) -> Result<(GovIssuer, Ledger), LedgerError> {
        let issuer = GovIssuer::generate(rng);
        let ledger = Ledger::with_issuers(&[issuer.document(now)])?;
        Ok((issuer, ledger))
    }

    /// Issues an identity credential. The holder name and a fresh salt
    /// feed the digest; only age and country are disclosed.
    pub fn issue<R: RngCore>(
        &self,
        holder_name: &str,
        attrs: GovAttrs,
        rng: &mut R,
    ) -> Credential {
        let params = CurveParams::p256();
        let mut material = holder_name.as_bytes().to_vec();
        material.extend_from_slice(&attrs.age.to_le_bytes());
        material.extend_from_slice(&attrs.country);
        material.extend_from_slice(&rng.next_u64().to_le_bytes());
        let digest = siphash64(&self.digest_key, &material);
        let msg = Credential::signed_message(CredKind::Gov, digest, Some(&attrs));
        let signature = ecdsa_sign(params, &msg, &self.keypair, rng);
        Credential {
            digest,
            signature,
            signer_did: self.did,
            kind: CredKind::Gov,
            attrs: Some(attrs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::test_rng;

    #[test]
    fn issued_credential_verifies_and_hides_the_name() {
        let mut rng = test_rng(3);
        let issuer = GovIssuer::generate(&mut rng);
        let cred = issuer.issue(
            "asha raman",
            GovAttrs {
                age: 29,
                country: *b"IN",
            },
            &mut rng,
        );
        assert!(cred.verify(CurveParams::p256(), &issuer.public_key()));
        let bytes = cred.encode();
        let hay = String::from_utf8_lossy(&bytes).to_lowercase();
        assert!(!hay.contains("asha"));
    }

    #[test]
    fn reissue_same_holder_distinct_digests() {
        let mut rng = test_rng(4);
        let issuer = GovIssuer::generate(&mut rng);
        let attrs = GovAttrs {
            age: 29,
            country: *b"IN",
        };
        let a = issuer.issue("asha raman", attrs, &mut rng);
        let b = issuer.issue("asha raman", attrs, &mut rng);
        assert_ne!(a.digest, b.digest);
    }

    #[test]
    fn bootstrap_ledger_resolves_issuer_for_provider() {
        use crate::didledger::AccessRole;
        let mut rng = test_rng(5);
        let (issuer, mut ledger) =
            GovIssuer::bootstrap(&mut rng, Timestamp::new(0)).unwrap();
        let doc = ledger
            .resolve_did(issuer.did(), AccessRole::Csp, None)
            .unwrap();
        assert_eq!(doc.public_key, issuer.public_key());
    }
}
