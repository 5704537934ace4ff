use std::collections::HashMap;
use std::sync::OnceLock;

use url::Url;

static CCTLD: &str = include_str!("../../data/cctld.tsv");

fn table() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        CCTLD
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .filter_map(|l| l.split_once('\t'))
            .collect()
    })
}

/// Region implied by the URL's country-code top-level domain.
///
/// Generic TLDs, IP hosts and unparseable URLs give `None`.
pub fn extract_region_from_url(url: &str) -> Option<String> {
    let parsed = Url::parse(url.trim()).ok()?;
    let host = parsed.domain()?;
    let tld = host.trim_end_matches('.').rsplit('.').next()?.to_ascii_lowercase();
    table().get(tld.as_str()).map(|r| (*r).to_owned())
}
