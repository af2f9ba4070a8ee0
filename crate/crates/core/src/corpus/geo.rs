use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{valid_coordinates, CorpusError};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Country-code TLDs whose registrations are not tied to the country.
const REPURPOSED_TLDS: [&str; 6] = ["ai", "fm", "io", "ly", "ag", "tv"];
/// TLDs that carry no geographic information.
const GENERIC_TLDS: [&str; 9] = ["com", "net", "org", "info", "biz", "edu", "gov", "mil", "int"];

/// Mapping from top-level domains to region codes.
///
/// Rows with an empty region column mark a TLD as excluded. Repurposed
/// country codes and generic TLDs are always excluded, even if a row maps them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TldMap {
    regions: BTreeMap<String, String>,
    excluded: BTreeSet<String>,
}

#[derive(Deserialize)]
struct TldRow {
    tld: String,
    #[serde(default)]
    region: Option<String>,
}

impl TldMap {
    pub fn new() -> Self {
        let excluded = REPURPOSED_TLDS
            .iter()
            .chain(GENERIC_TLDS.iter())
            .map(|t| t.to_string())
            .collect();
        TldMap {
            regions: BTreeMap::new(),
            excluded,
        }
    }

    pub fn insert(&mut self, tld: &str, region: &str) {
        self.regions.insert(normalize_tld(tld), region.trim().to_ascii_uppercase());
    }

    pub fn exclude(&mut self, tld: &str) {
        self.excluded.insert(normalize_tld(tld));
    }

    pub fn is_excluded(&self, tld: &str) -> bool {
        self.excluded.contains(&normalize_tld(tld))
    }

    /// Reads a `tld,region` CSV with a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, CorpusError> {
        let mut map = TldMap::new();
        let mut rdr = csv::Reader::from_reader(reader);
        for row in rdr.deserialize() {
            let row: TldRow = row?;
            match row.region.as_deref().map(str::trim) {
                Some(region) if !region.is_empty() && region != "-" => map.insert(&row.tld, region),
                _ => map.exclude(&row.tld),
            }
        }
        Ok(map)
    }

    fn lookup(&self, tld: &str) -> Option<&str> {
        if self.excluded.contains(tld) {
            return None;
        }
        self.regions.get(tld).map(String::as_str)
    }
}

fn normalize_tld(tld: &str) -> String {
    tld.trim().trim_start_matches('.').to_ascii_lowercase()
}

/// Region of a web domain from its country-code top-level domain.
///
/// `Ok(None)` means the domain is well formed but carries no usable region
/// (generic, repurposed or unmapped TLD).
pub fn regionalize_domain(domain: &str, tld_map: &TldMap) -> Result<Option<String>, CorpusError> {
    let malformed = || CorpusError::MalformedDomain(domain.to_string());
    let host = domain.trim().strip_suffix('.').unwrap_or(domain.trim());
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() < 2 {
        return Err(malformed());
    }
    for label in &labels {
        let ok = !label.is_empty()
            && label.len() <= 63
            && !label.starts_with('-')
            && !label.ends_with('-')
            && label.chars().all(|c| c.is_alphanumeric() || c == '-');
        if !ok {
            return Err(malformed());
        }
    }
    let tld = labels[labels.len() - 1].to_lowercase();
    Ok(tld_map.lookup(&tld).map(str::to_string))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct City {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub country: String,
}

impl City {
    pub fn new(name: &str, lat: f64, lon: f64, country: &str) -> Self {
        City {
            name: name.to_string(),
            lat,
            lon,
            country: country.to_string(),
        }
    }

    /// Reads a `name,lat,lon,country` gazetteer with a header row.
    pub fn read_gazetteer<R: Read>(reader: R) -> Result<Vec<City>, CorpusError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut cities = Vec::new();
        for row in rdr.deserialize() {
            let city: City = row?;
            if !valid_coordinates(city.lat, city.lon) {
                return Err(CorpusError::InvalidCoordinates {
                    lat: city.lat,
                    lon: city.lon,
                });
            }
            cities.push(city);
        }
        Ok(cities)
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

const TIE_KM: f64 = 1e-9;

/// Nearest city within `radius_km`, ties broken by city name.
pub fn assign_to_city(
    lat: f64,
    lon: f64,
    cities: &[City],
    radius_km: f64,
) -> Result<Option<&City>, CorpusError> {
    if cities.is_empty() {
        return Err(CorpusError::EmptyGazetteer);
    }
    if !valid_coordinates(lat, lon) {
        return Err(CorpusError::InvalidCoordinates { lat, lon });
    }
    let mut best: Option<(&City, f64)> = None;
    for city in cities {
        let d = haversine_km(lat, lon, city.lat, city.lon);
        best = match best {
            None => Some((city, d)),
            Some((b, bd)) => {
                if d < bd - TIE_KM || ((d - bd).abs() <= TIE_KM && city.name < b.name) {
                    Some((city, d))
                } else {
                    Some((b, bd))
                }
            }
        };
    }
    Ok(best.filter(|(_, d)| *d <= radius_km).map(|(c, _)| c))
}
