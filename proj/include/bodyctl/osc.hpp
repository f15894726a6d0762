#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace bodyctl {

using Bytes = std::vector<std::uint8_t>;

/// Printable ASCII without blanks, starting with '/'.
bool is_valid_osc_address(std::string_view address);

/// OSC 1.0 message with a single float32 argument (",f"), no bundle.
/// Throws Error on an invalid address.
Bytes encode_osc(std::string_view address, float value);

/// Appends [u32 big-endian length][datagram].
void write_capture_record(std::ostream& out, const Bytes& datagram);

/// Splits a capture file back into datagrams. Throws Error on a truncated record.
std::vector<Bytes> read_capture(std::istream& in);

} // namespace bodyctl
