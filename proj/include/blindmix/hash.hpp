#pragma once

#include "blindmix/bytes.hpp"

namespace blindmix {

/// Standard SHA-256.
Digest hash256(ByteView data);

/// hash256(hash256(data)).
Digest double_hash256(ByteView data);

Digest hmac_sha256(ByteView key, ByteView data);

}  // namespace blindmix
