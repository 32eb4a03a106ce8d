use std::fmt;
use std::str::FromStr;

use crate::corpus::DocumentId;
use crate::error::Error;

/// How two similarity values are folded into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aggregation {
    Max,
    Average,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Max => "max",
            Aggregation::Average => "avg",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "max" => Ok(Aggregation::Max),
            "avg" | "average" | "mean" => Ok(Aggregation::Average),
            _ => Err(Error::Config(format!("unknown aggregation {s:?} (max|avg)"))),
        }
    }
}

/// Text representation used when comparing rhetorical segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentRep {
    TfIdf,
    DocVec,
}

/// Every similarity method the crate can score a pair with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Biblio,
    CoCitation,
    Dispersion,
    Node2Vec,
    ParagraphLinks,
    FullText,
    Thematic(SegmentRep, Aggregation),
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Biblio,
        Method::CoCitation,
        Method::Dispersion,
        Method::Node2Vec,
        Method::ParagraphLinks,
        Method::FullText,
        Method::Thematic(SegmentRep::TfIdf, Aggregation::Max),
        Method::Thematic(SegmentRep::TfIdf, Aggregation::Average),
        Method::Thematic(SegmentRep::DocVec, Aggregation::Max),
        Method::Thematic(SegmentRep::DocVec, Aggregation::Average),
    ];

    pub fn name(self) -> &'static str {
        use Aggregation::*;
        use SegmentRep::*;
        match self {
            Method::Biblio => "biblio",
            Method::CoCitation => "cocite",
            Method::Dispersion => "dispersion",
            Method::Node2Vec => "node2vec",
            Method::ParagraphLinks => "paralinks",
            Method::FullText => "fulltext",
            Method::Thematic(TfIdf, Max) => "thematic-max",
            Method::Thematic(TfIdf, Average) => "thematic-avg",
            Method::Thematic(DocVec, Max) => "thematic-docvec-max",
            Method::Thematic(DocVec, Average) => "thematic-docvec-avg",
        }
    }

    /// True for the precedent-citation measures.
    pub fn is_network(self) -> bool {
        matches!(
            self,
            Method::Biblio | Method::CoCitation | Method::Dispersion | Method::Node2Vec
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = match s {
            "cocitation" | "co-citation" => "cocite",
            "bibliographic-coupling" => "biblio",
            "paragraph-links" => "paralinks",
            "thematic" => "thematic-max",
            other => other,
        };
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScore {
    pub method: Method,
    pub pair: (DocumentId, DocumentId),
    pub value: f64,
}

impl SimilarityScore {
    pub(crate) fn new(method: Method, a: &DocumentId, b: &DocumentId, value: f64) -> Self {
        SimilarityScore {
            method,
            pair: (a.clone(), b.clone()),
            value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("pagerank".parse::<Method>().is_err());
    }
}
