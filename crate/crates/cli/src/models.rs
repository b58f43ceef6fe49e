//! Model lookup: a file path or one of the built-in names.

use std::path::Path;

use polyexplain_core::{Error, Network, Result};

/// `toy_a`, or `fixture_<w0>_<w1>_..._<wL>` for a seeded random network with
/// those layer widths. Files take precedence over built-in names.
pub fn resolve(name: &str, seed: u64) -> Result<Network> {
    if Path::new(name).exists() {
        return Network::load(name);
    }
    if name == "toy_a" {
        return Ok(Network::toy_a());
    }
    if let Some(rest) = name.strip_prefix("fixture_") {
        let widths = rest
            .split('_')
            .map(|w| w.parse::<usize>().map_err(|_| Error::Parse(format!("bad layer width `{w}` in `{name}`"))))
            .collect::<Result<Vec<_>>>()?;
        return Network::random(&widths, seed);
    }
    Network::load(name)
}
