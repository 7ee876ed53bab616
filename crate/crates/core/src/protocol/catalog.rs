//! Product catalog shared by the customer wallet and the provider.
//! Product details stay inside the catalog; only their keyed digests
//! ever reach the wire.

use std::collections::BTreeMap;

/// One sellable product.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Product {
    pub pid: u64,
    /// Free-form product details (name, price, ...); never serialized
    /// into envelopes.
    pub details: Vec<u8>,
    /// Whether the eligibility rule applies to this product.
    pub age_restricted: bool,
}

/// Catalog keyed by product id.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ProductCatalog {
    products: BTreeMap<u64, Product>,
}

impl ProductCatalog {
    pub fn new(products: impl IntoIterator<Item = Product>) -> ProductCatalog {
        ProductCatalog {
            products: products.into_iter().map(|p| (p.pid, p)).collect(),
        }
    }

    pub fn get(&self, pid: u64) -> Option<&Product> {
        self.products.get(&pid)
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn pids(&self) -> impl Iterator<Item = u64> + '_ {
        self.products.keys().copied()
    }
}

/// The stock desk-scale catalog.
pub fn default_catalog() -> ProductCatalog {
    ProductCatalog::new([
        Product {
            pid: 0x0000000000000001,
            details: b"household cleaner 500ml unit-price 350".to_vec(),
            age_restricted: false,
        },
        Product {
            pid: 0x0000000000000002,
            details: b"glass etching acid 250ml unit-price 920".to_vec(),
            age_restricted: true,
        },
        Product {
            pid: 0x0000000000000003,
            details: b"usb-c cable 1m unit-price 199".to_vec(),
            age_restricted: false,
        },
        Product {
            pid: 0x0000000000000004,
            details: b"solder flux pen unit-price 240".to_vec(),
            age_restricted: true,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_hits_and_misses() {
        let catalog = default_catalog();
        assert!(catalog.get(1).is_some());
        assert!(catalog.get(0xdead).is_none());
        assert_eq!(catalog.len(), 4);
    }

    #[test]
    fn restricted_flags_present() {
        let catalog = default_catalog();
        assert!(!catalog.get(1).unwrap().age_restricted);
        assert!(catalog.get(2).unwrap().age_restricted);
    }
}
