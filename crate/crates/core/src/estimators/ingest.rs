//! Campaign logs (CSV) and prior files (JSON).

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{CampaignOutcome, PriorSpec};
use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["scenario_id", "subdomain", "outcome"];

/// One executed test from a campaign log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub scenario_id: String,
    pub subdomain: usize,
    pub failed: bool,
}

/// Reads a `scenario_id,subdomain,outcome` log. Empty input yields no records.
pub fn parse_campaign_csv<R: Read>(input: R) -> Result<Vec<CampaignRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = Vec::new();
    let mut saw_header = false;
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line() as usize);
        if !saw_header {
            if row.iter().ne(HEADER.iter().copied()) {
                return Err(Error::parse(
                    line,
                    format!(
                        "expected header `{}`, found `{}`",
                        HEADER.join(","),
                        row.iter().collect::<Vec<_>>().join(",")
                    ),
                ));
            }
            saw_header = true;
            continue;
        }
        if row.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected 3 fields, found {}", row.len()),
            ));
        }
        let subdomain: usize = row[1].parse().map_err(|_| {
            Error::parse(line, format!("subdomain `{}` is not a positive integer", &row[1]))
        })?;
        if subdomain == 0 {
            return Err(Error::parse(line, "subdomain indices start at 1"));
        }
        let failed = match row[2].to_ascii_lowercase().as_str() {
            "fail" => true,
            "pass" => false,
            other => {
                return Err(Error::parse(
                    line,
                    format!("outcome `{other}` must be `pass` or `fail`"),
                ))
            }
        };
        records.push(CampaignRecord {
            scenario_id: row[0].to_string(),
            subdomain,
            failed,
        });
    }
    Ok(records)
}

/// Folds a log into a single campaign outcome.
pub fn aggregate(records: &[CampaignRecord]) -> CampaignOutcome {
    CampaignOutcome {
        tests: records.len() as u64,
        failures: records.iter().filter(|r| r.failed).count() as u64,
    }
}

/// Per-subdomain outcomes, index `i − 1` holding subdomain `i`.
pub fn aggregate_by_subdomain(records: &[CampaignRecord], n_subdomains: usize) -> Result<Vec<CampaignOutcome>> {
    let mut out = vec![CampaignOutcome::default(); n_subdomains];
    for r in records {
        let slot = out.get_mut(r.subdomain.wrapping_sub(1)).ok_or_else(|| {
            Error::domain(format!(
                "record for `{}` names subdomain {}, but the space has {n_subdomains}",
                r.scenario_id, r.subdomain
            ))
        })?;
        slot.tests += 1;
        slot.failures += u64::from(r.failed);
    }
    Ok(out)
}

/// Parses and validates `{"kind":"beta","a":..,"b":..}` or `{"kind":"grid","values":[..]}`.
pub fn parse_prior(text: &str) -> Result<PriorSpec> {
    let prior: PriorSpec =
        serde_json::from_str(text).map_err(|e| Error::parse(Some(e.line()), e.to_string()))?;
    prior.validate()?;
    Ok(prior)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_aggregates() {
        let log = "scenario_id,subdomain,outcome\na,1,pass\nb,2,fail\nc,2,PASS\n";
        let recs = parse_campaign_csv(log.as_bytes()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(aggregate(&recs), CampaignOutcome { tests: 3, failures: 1 });
        let by = aggregate_by_subdomain(&recs, 2).unwrap();
        assert_eq!(by[0], CampaignOutcome { tests: 1, failures: 0 });
        assert_eq!(by[1], CampaignOutcome { tests: 2, failures: 1 });
        assert!(aggregate_by_subdomain(&recs, 1).is_err());
    }

    #[test]
    fn empty_input_has_no_records() {
        assert!(parse_campaign_csv("".as_bytes()).unwrap().is_empty());
        assert!(parse_campaign_csv("scenario_id,subdomain,outcome\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "scenario_id,subdomain,outcome\na,1,pass\nb,x,fail\n";
        assert!(matches!(
            parse_campaign_csv(bad.as_bytes()),
            Err(Error::Parse { line: Some(3), .. })
        ));
        let bad = "scenario_id,subdomain,outcome\na,1,pass\nb,1,maybe\n";
        assert!(matches!(
            parse_campaign_csv(bad.as_bytes()),
            Err(Error::Parse { line: Some(3), .. })
        ));
        let bad = "id,sub,result\n";
        assert!(matches!(
            parse_campaign_csv(bad.as_bytes()),
            Err(Error::Parse { line: Some(1), .. })
        ));
        let bad = "scenario_id,subdomain,outcome\na,1\n";
        assert!(matches!(
            parse_campaign_csv(bad.as_bytes()),
            Err(Error::Parse { line: Some(2), .. })
        ));
    }

    #[test]
    fn prior_files() {
        assert_eq!(
            parse_prior(r#"{"kind":"beta","a":2,"b":3}"#).unwrap(),
            PriorSpec::Beta { a: 2.0, b: 3.0 }
        );
        assert!(parse_prior(r#"{"kind":"grid","values":[1,1,1]}"#).is_ok());
        assert!(parse_prior(r#"{"kind":"grid","values":[5,5,5]}"#).is_err());
        assert!(parse_prior(r#"{"kind":"beta","a":-1,"b":3}"#).is_err());
        assert!(matches!(parse_prior("{\n\"kind\": \"gamma\"}"), Err(Error::Parse { .. })));
    }
}
