//! Named, parameterised series with their ratio limits and, where known,
//! closed-form sums.

pub mod dist;
pub mod terms;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::logspace::{log_sum_exp, LogValue};
use crate::series::SeriesSpec;

pub use dist::CountDistribution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Positive,
    /// Strictly greater than the bound.
    Above(f64),
    OpenUnit,
    NonNegativeInteger,
    PositiveInteger,
}

impl Domain {
    pub fn contains(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            Domain::Positive => v > 0.0,
            Domain::Above(b) => v > b,
            Domain::OpenUnit => v > 0.0 && v < 1.0,
            Domain::NonNegativeInteger => v >= 0.0 && v.fract() == 0.0,
            Domain::PositiveInteger => v >= 1.0 && v.fract() == 0.0,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Positive => write!(f, "(0, inf)"),
            Domain::Above(b) => write!(f, "({b}, inf)"),
            Domain::OpenUnit => write!(f, "(0, 1)"),
            Domain::NonNegativeInteger => write!(f, "{{0, 1, 2, ...}}"),
            Domain::PositiveInteger => write!(f, "{{1, 2, 3, ...}}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub domain: Domain,
    pub default: Option<f64>,
}

const fn p(name: &'static str, domain: Domain, default: Option<f64>) -> ParamSpec {
    ParamSpec { name, domain, default }
}

/// Named parameter values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Params(BTreeMap::new())
    }

    pub fn set(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn req(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn int(&self, name: &str) -> u64 {
        self.0[name] as u64
    }
}

impl<'a> FromIterator<(&'a str, f64)> for Params {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        Params(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

type Builder = fn(&Params) -> Result<SeriesSpec>;
type ClosedForm = fn(&Params) -> Option<LogValue>;

pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    build: Builder,
    closed_form: ClosedForm,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry").field("id", &self.id).field("params", &self.params).finish_non_exhaustive()
    }
}

impl CatalogEntry {
    /// Fills defaults and checks every parameter against its domain.
    pub fn resolve(&self, given: &Params) -> Result<Params> {
        for (name, _) in given.iter() {
            if !self.params.iter().any(|s| s.name == name) {
                return domain(format!("series `{}` has no parameter `{name}`", self.id));
            }
        }
        let mut out = Params::new();
        for spec in self.params {
            let v = match (given.get(spec.name), spec.default) {
                (Some(v), _) => v,
                (None, Some(d)) => d,
                (None, None) => return domain(format!("series `{}` needs parameter `{}`", self.id, spec.name)),
            };
            if !spec.domain.contains(v) {
                return domain(format!("parameter `{}` = {v} outside {}", spec.name, spec.domain));
            }
            out.insert(spec.name, v);
        }
        Ok(out)
    }

    pub fn spec(&self, params: &Params) -> Result<SeriesSpec> {
        let resolved = self.resolve(params)?;
        (self.build)(&resolved)
    }

    /// `ln S` when a closed form is known at these parameters.
    pub fn closed_form(&self, params: &Params) -> Result<Option<LogValue>> {
        let resolved = self.resolve(params)?;
        Ok((self.closed_form)(&resolved))
    }
}

fn none(_: &Params) -> Option<LogValue> {
    None
}

fn base_poisson(p: &Params) -> Result<CountDistribution> {
    CountDistribution::poisson(p.req("lambda"))
}

fn base_negbin(p: &Params) -> Result<CountDistribution> {
    CountDistribution::negbin(p.req("mu"), p.req("phi"))
}

static ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "comp",
        description: "COMP normalising constant, terms mu^n / (n!)^nu",
        params: &[p("mu", Domain::Positive, None), p("nu", Domain::Positive, None)],
        build: |p| terms::comp(p.req("mu"), p.req("nu")),
        closed_form: |p| (p.req("nu") == 1.0).then(|| LogValue::new(p.req("mu"))),
    },
    CatalogEntry {
        id: "comp_reparam",
        description: "reparametrised COMP constant, terms (mu^n / n!)^nu",
        params: &[p("mu", Domain::Positive, None), p("nu", Domain::Positive, None)],
        build: |p| terms::comp_reparam(p.req("mu"), p.req("nu")),
        closed_form: |p| (p.req("nu") == 1.0).then(|| LogValue::new(p.req("mu"))),
    },
    CatalogEntry {
        id: "double_poisson",
        description: "double Poisson normalising constant",
        params: &[p("mu", Domain::Positive, None), p("phi", Domain::Positive, None)],
        build: |p| terms::double_poisson(p.req("mu"), p.req("phi")),
        closed_form: |p| (p.req("phi") == 1.0).then(|| LogValue::new(p.req("mu"))),
    },
    CatalogEntry {
        id: "power_geometric",
        description: "1 / ((n+1)^2 a^(n+1)), sums to Li2(1/a)",
        params: &[p("a", Domain::Above(1.0), Some(2.0))],
        build: |p| terms::power_geometric(p.req("a")),
        closed_form: none,
    },
    CatalogEntry {
        id: "poisson_fact_moment",
        description: "r-th factorial moment of a Poisson(lambda)",
        params: &[p("lambda", Domain::Positive, None), p("r", Domain::PositiveInteger, None)],
        build: |p| terms::poisson_factorial_moment(p.req("lambda"), p.int("r")),
        closed_form: |p| Some(LogValue::new(p.req("r") * p.req("lambda").ln())),
    },
    CatalogEntry {
        id: "negbin_marginal",
        description: "Pr(X = x) for binomially thinned negative binomial counts, summed over Y = x + n",
        params: &[
            p("x", Domain::NonNegativeInteger, None),
            p("mu", Domain::Positive, None),
            p("phi", Domain::Positive, None),
            p("eta", Domain::OpenUnit, None),
        ],
        build: |p| terms::negbin_marginal(p.int("x"), p.req("mu"), p.req("phi"), p.req("eta")),
        closed_form: |p| {
            let mean = p.req("eta") * p.req("mu");
            Some(LogValue::new(dist::negbin_ln_pmf(p.int("x"), mean, p.req("phi"))))
        },
    },
    CatalogEntry {
        id: "sentinel_rho0",
        description: "Pr(no detection) under size-dependent detection, Poisson sizes",
        params: &[p("lambda", Domain::Positive, None), p("eta", Domain::OpenUnit, None)],
        build: |p| terms::sentinel_rho0(base_poisson(p)?, p.req("eta")),
        closed_form: |p| Some(LogValue::new(-p.req("lambda") * p.req("eta"))),
    },
    CatalogEntry {
        id: "sentinel_rho0_negbin",
        description: "Pr(no detection) under size-dependent detection, negative binomial sizes",
        params: &[p("mu", Domain::Positive, None), p("phi", Domain::Positive, None), p("eta", Domain::OpenUnit, None)],
        build: |p| terms::sentinel_rho0(base_negbin(p)?, p.req("eta")),
        closed_form: |p| {
            let (mu, phi, eta) = (p.req("mu"), p.req("phi"), p.req("eta"));
            Some(LogValue::new(phi * (phi / (eta * mu + phi)).ln()))
        },
    },
    CatalogEntry {
        id: "sentinel_moment",
        description: "E[Y (1-eta)^Y] for Poisson sizes",
        params: &[p("lambda", Domain::Positive, None), p("eta", Domain::OpenUnit, None)],
        build: |p| terms::sentinel_moment(base_poisson(p)?, p.req("eta")),
        closed_form: |p| {
            let (lambda, eta) = (p.req("lambda"), p.req("eta"));
            Some(LogValue::new(lambda.ln() + (-eta).ln_1p() - lambda * eta))
        },
    },
    CatalogEntry {
        id: "sentinel_moment_negbin",
        description: "E[Y (1-eta)^Y] for negative binomial sizes",
        params: &[p("mu", Domain::Positive, None), p("phi", Domain::Positive, None), p("eta", Domain::OpenUnit, None)],
        build: |p| terms::sentinel_moment(base_negbin(p)?, p.req("eta")),
        closed_form: |p| {
            let (mu, phi, eta) = (p.req("mu"), p.req("phi"), p.req("eta"));
            Some(LogValue::new(mu.ln() + (-eta).ln_1p() + (phi + 1.0) * (phi / (phi + mu * eta)).ln()))
        },
    },
    CatalogEntry {
        id: "erlang_full",
        description: "zero-truncated Poisson mixture of Erlang densities at x, summed over the shape",
        params: &[p("x", Domain::Positive, None), p("mu", Domain::Positive, None), p("beta", Domain::Positive, None)],
        build: |p| terms::erlang_full(p.req("x"), p.req("mu"), p.req("beta")),
        closed_form: none,
    },
    CatalogEntry {
        id: "bessel_i",
        description: "modified Bessel function I_v(z) as a power series",
        params: &[p("v", Domain::Above(-1e-300), Some(0.0)), p("z", Domain::Positive, None)],
        build: |p| terms::bessel_i(p.req("v"), p.req("z")),
        closed_form: none,
    },
    CatalogEntry {
        id: "telescoping",
        description: "1 / ((n+1)(n+2)), sums to 1 but has ratio limit 1",
        params: &[],
        build: |_| Ok(terms::telescoping()),
        closed_form: |_| Some(LogValue::ONE),
    },
    CatalogEntry {
        id: "geometric",
        description: "r^n",
        params: &[p("r", Domain::OpenUnit, None)],
        build: |p| terms::geometric(p.req("r")),
        closed_form: |p| Some(LogValue::new(-(-p.req("r")).ln_1p())),
    },
];

pub fn entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn lookup(id: &str) -> Result<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownSeries(id.to_string()))
}

/// Sum of the first `n_terms` terms from the series offset, accumulated in
/// ascending order with an error-free-transformation accumulator.
pub fn reference_sum(series: &SeriesSpec, n_terms: usize) -> LogValue {
    let off = series.index_offset;
    let logs: Vec<LogValue> = (0..n_terms as u64).map(|i| series.log_term(off + i)).collect();
    log_sum_exp(&logs).unwrap_or(LogValue::ZERO)
}

/// Default length of [`reference_sum`] in accuracy comparisons.
pub const REFERENCE_TERMS: usize = 500_000;
