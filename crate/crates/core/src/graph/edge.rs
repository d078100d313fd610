use std::fmt;

/// Edge categories of a multi-relational function graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeCategory {
    DataType,
    ControlInfo,
    Fields,
    DataFlow,
    Fallback,
    SelfLoop,
}

impl EdgeCategory {
    pub const ALL: [EdgeCategory; 6] = [
        EdgeCategory::DataType,
        EdgeCategory::ControlInfo,
        EdgeCategory::Fields,
        EdgeCategory::DataFlow,
        EdgeCategory::Fallback,
        EdgeCategory::SelfLoop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeCategory::DataType => "DataType",
            EdgeCategory::ControlInfo => "ControlInfo",
            EdgeCategory::Fields => "Fields",
            EdgeCategory::DataFlow => "DataFlow",
            EdgeCategory::Fallback => "Fallback",
            EdgeCategory::SelfLoop => "SelfLoop",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeCategory> {
        EdgeCategory::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// The closed subtype set of this category.
    pub fn subtypes(self) -> &'static [&'static str] {
        match self {
            EdgeCategory::DataType => DATA_TYPES,
            EdgeCategory::ControlInfo => &["sequential", "if", "else", "while", "for", "require"],
            EdgeCategory::Fields => &[
                "left",
                "right",
                "operation",
                "function_call",
                "condition",
                "argument",
                "member",
                "index",
            ],
            EdgeCategory::DataFlow => &["compute_from", "value_from"],
            EdgeCategory::Fallback => &["fallback"],
            EdgeCategory::SelfLoop => &["self"],
        }
    }
}

impl fmt::Display for EdgeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Elementary type tokens plus the composite `mapping`, `array` and
/// `user_defined` forms.
const DATA_TYPES: &[&str] = &[
    "uint", "uint8", "uint16", "uint24", "uint32", "uint40", "uint48", "uint56", "uint64", "uint72",
    "uint80", "uint88", "uint96", "uint104", "uint112", "uint120", "uint128", "uint136", "uint144",
    "uint152", "uint160", "uint168", "uint176", "uint184", "uint192", "uint200", "uint208", "uint216",
    "uint224", "uint232", "uint240", "uint248", "uint256", "int", "int8", "int16", "int24", "int32",
    "int40", "int48", "int56", "int64", "int72", "int80", "int88", "int96", "int104", "int112",
    "int120", "int128", "int136", "int144", "int152", "int160", "int168", "int176", "int184",
    "int192", "int200", "int208", "int216", "int224", "int232", "int240", "int248", "int256", "bool",
    "address", "string", "byte", "bytes", "bytes1", "bytes2", "bytes3", "bytes4", "bytes5", "bytes6",
    "bytes7", "bytes8", "bytes9", "bytes10", "bytes11", "bytes12", "bytes13", "bytes14", "bytes15",
    "bytes16", "bytes17", "bytes18", "bytes19", "bytes20", "bytes21", "bytes22", "bytes23",
    "bytes24", "bytes25", "bytes26", "bytes27", "bytes28", "bytes29", "bytes30", "bytes31",
    "bytes32", "mapping", "array", "user_defined",
];

/// Subtype of edges whose recorded subtype fell outside the closed sets.
pub const UNK_EDGE: &str = "UNK_EDGE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeType {
    pub category: EdgeCategory,
    subtype: &'static str,
}

impl EdgeType {
    pub const SEQUENTIAL: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "sequential");
    pub const IF: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "if");
    pub const ELSE: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "else");
    pub const WHILE: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "while");
    pub const FOR: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "for");
    pub const REQUIRE: EdgeType = EdgeType::known(EdgeCategory::ControlInfo, "require");
    pub const LEFT: EdgeType = EdgeType::known(EdgeCategory::Fields, "left");
    pub const RIGHT: EdgeType = EdgeType::known(EdgeCategory::Fields, "right");
    pub const OPERATION: EdgeType = EdgeType::known(EdgeCategory::Fields, "operation");
    pub const FUNCTION_CALL: EdgeType = EdgeType::known(EdgeCategory::Fields, "function_call");
    pub const CONDITION: EdgeType = EdgeType::known(EdgeCategory::Fields, "condition");
    pub const ARGUMENT: EdgeType = EdgeType::known(EdgeCategory::Fields, "argument");
    pub const MEMBER: EdgeType = EdgeType::known(EdgeCategory::Fields, "member");
    pub const INDEX: EdgeType = EdgeType::known(EdgeCategory::Fields, "index");
    pub const COMPUTE_FROM: EdgeType = EdgeType::known(EdgeCategory::DataFlow, "compute_from");
    pub const VALUE_FROM: EdgeType = EdgeType::known(EdgeCategory::DataFlow, "value_from");
    pub const FALLBACK: EdgeType = EdgeType::known(EdgeCategory::Fallback, "fallback");
    pub const SELF_LOOP: EdgeType = EdgeType::known(EdgeCategory::SelfLoop, "self");

    const fn known(category: EdgeCategory, subtype: &'static str) -> EdgeType {
        EdgeType { category, subtype }
    }

    /// Looks `subtype` up in the closed set of `category`.
    pub fn new(category: EdgeCategory, subtype: &str) -> Option<EdgeType> {
        category
            .subtypes()
            .iter()
            .find(|s| **s == subtype)
            .map(|s| EdgeType::known(category, s))
    }

    pub fn unknown(category: EdgeCategory) -> EdgeType {
        EdgeType::known(category, UNK_EDGE)
    }

    /// DataType edge for a canonical type token; unlisted types map to
    /// [`UNK_EDGE`].
    pub fn data_type(token: &str) -> EdgeType {
        EdgeType::new(EdgeCategory::DataType, token).unwrap_or_else(|| EdgeType::unknown(EdgeCategory::DataType))
    }

    pub fn subtype(&self) -> &'static str {
        self.subtype
    }

    pub fn is_unknown(&self) -> bool {
        self.subtype == UNK_EDGE
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.category, self.subtype)
    }
}

/// Every known subtype in a fixed order (categories in declaration order).
pub fn all_subtypes() -> impl Iterator<Item = &'static str> {
    EdgeCategory::ALL.into_iter().flat_map(|c| c.subtypes().iter().copied())
}
