// Golden constants for the v1 stream derivation. Regenerate only when
// the derivation scheme version is bumped (see DERIVE_DOMAIN).
const GOLDEN_A0: u64 = 6376158580019566302;
const GOLDEN_A1: u64 = 3232243295304007299;
const GOLDEN_A2: u64 = 6882072551531569942;
const GOLDEN_A3: u64 = 10344695406764649395;
const GOLDEN_B0: u64 = 6013639853275639362;
const GOLDEN_B1: u64 = 13352271372189394235;
const GOLDEN_B2: u64 = 12869375797594627265;
const GOLDEN_B3: u64 = 949163835921803724;
