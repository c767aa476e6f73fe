#pragma once

namespace gaplabel::detail {

/// 128-bit product type for residue arithmetic modulo 64-bit moduli.
__extension__ typedef __int128 Wide;

} // namespace gaplabel::detail
