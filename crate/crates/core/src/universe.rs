//! Built-in instrument groups.

/// Twenty large-cap US stocks spanning the major sectors.
pub const US_STOCKS: [&str; 20] = [
    "AAPL", "MSFT", "GOOGL", "AMZN", "NVDA", "META", "TSLA", "V", "BRK-B", "UNH", "LLY", "JNJ",
    "XOM", "WMT", "PG", "MA", "CVX", "AVGO", "HD", "MRK",
];

/// Twenty commodity futures (energy, metals, grains, softs, livestock).
pub const COMMODITIES: [&str; 20] = [
    "CL=F", "BZ=F", "RB=F", "HO=F", "NG=F", "ALI=F", "HG=F", "ZN=F", "GC=F", "SI=F", "ZC=F",
    "ZW=F", "KE=F", "ZS=F", "CT=F", "KC=F", "CC=F", "LE=F", "GF=F", "HE=F",
];

/// Five largest stocks of each GICS sector.
pub const SECTORS: [(&str, [&str; 5]); 11] = [
    ("Consumer Discretionary", ["AMZN", "TSLA", "HD", "MCD", "NKE"]),
    ("Consumer Staples", ["WMT", "PG", "COST", "KO", "PEP"]),
    ("Energy", ["XOM", "CVX", "COP", "SLB", "EOG"]),
    ("Financials", ["BRK-B", "V", "JPM", "MA", "BAC"]),
    ("Healthcare", ["LLY", "UNH", "JNJ", "MRK", "ABBV"]),
    ("Industrials", ["UNP", "CAT", "GE", "UPS", "HON"]),
    ("IT", ["MSFT", "AAPL", "NVDA", "AVGO", "ORCL"]),
    ("Materials", ["LIN", "SHW", "SCCO", "APD", "ECL"]),
    ("Real Estate", ["PLD", "AMT", "EQIX", "SPG", "PSA"]),
    ("Utilities", ["NEE", "SO", "DUK", "SRE", "AEP"]),
    ("Communications Services", ["GOOGL", "META", "NFLX", "TMUS", "CMCSA"]),
];
