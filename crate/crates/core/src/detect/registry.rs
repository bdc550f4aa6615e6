use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SwapEvent;
use crate::error::{Error, Result};

/// Addresses whose callers are the real initiators: system contracts
/// (bootloaders, entry points) and widely shared routers or aggregators.
/// Addresses are compared case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRegistry {
    #[serde(default)]
    pub system_contracts: BTreeSet<String>,
    #[serde(default)]
    pub shared_routers: BTreeSet<String>,
}

impl ActorRegistry {
    pub fn new<I, J, S, T>(system_contracts: I, shared_routers: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        ActorRegistry {
            system_contracts: system_contracts.into_iter().map(|a| normalize(a.as_ref())).collect(),
            shared_routers: shared_routers.into_iter().map(|a| normalize(a.as_ref())).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ActorRegistry = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(ActorRegistry::new(raw.system_contracts, raw.shared_routers))
    }

    pub fn is_intermediary(&self, address: &str) -> bool {
        let a = normalize(address);
        self.system_contracts.contains(&a) || self.shared_routers.contains(&a)
    }
}

pub fn normalize(address: &str) -> String {
    address.trim().to_ascii_lowercase()
}

/// `tx_from` when the transaction targets a registered intermediary,
/// otherwise `tx_to`. Lower-cased.
pub fn resolve_actor_id(event: &SwapEvent, registry: &ActorRegistry) -> Result<String> {
    let to = event
        .tx_to
        .as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| {
            Error::InvalidInput(format!("event {} has no tx_to; cannot attribute", event.tx_hash))
        })?;
    Ok(if registry.is_intermediary(to) {
        normalize(&event.tx_from)
    } else {
        normalize(to)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::tests::event;

    #[test]
    fn attribution_rules() {
        let reg = ActorRegistry::new(["0xBOOT"], ["0xRouter"]);
        let mut e = event("0xf", "0xrouter", 0);
        assert_eq!(resolve_actor_id(&e, &reg).unwrap(), "0xf");
        e.tx_to = Some("0xBot".into());
        assert_eq!(resolve_actor_id(&e, &reg).unwrap(), "0xbot");
        e.tx_to = Some("0xboot".into());
        assert_eq!(resolve_actor_id(&e, &reg).unwrap(), "0xf");
        e.tx_to = None;
        assert!(resolve_actor_id(&e, &reg).is_err());
        e.tx_to = Some("  ".into());
        assert!(resolve_actor_id(&e, &reg).is_err());
    }

    #[test]
    fn registry_json() {
        let reg = ActorRegistry::from_json(r#"{"system_contracts":["0xA"],"shared_routers":["0xB","0xb"]}"#)
            .unwrap();
        assert!(reg.is_intermediary("0xa"));
        assert_eq!(reg.shared_routers.len(), 1);
        assert!(ActorRegistry::from_json("{").is_err());
        assert_eq!(ActorRegistry::from_json("{}").unwrap(), ActorRegistry::default());
    }
}
