#include "bodyctl/osc.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "bodyctl/error.hpp"

namespace bodyctl {

namespace {

void put_u32(Bytes& out, std::uint32_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

// OSC-string: bytes, then 1..4 NULs so the total is a multiple of 4.
void put_padded(Bytes& out, std::string_view s)
{
    out.insert(out.end(), s.begin(), s.end());
    const std::size_t pad = 4 - (s.size() % 4);
    out.insert(out.end(), pad, 0);
}

} // namespace

bool is_valid_osc_address(std::string_view address)
{
    if (address.empty() || address.front() != '/') return false;
    for (const char c : address) {
        if (c <= 0x20 || c >= 0x7f) return false;
    }
    return true;
}

Bytes encode_osc(std::string_view address, float value)
{
    if (!is_valid_osc_address(address)) throw Error("invalid OSC address '" + std::string(address) + "'");
    Bytes out;
    out.reserve(address.size() + 12);
    put_padded(out, address);
    put_padded(out, ",f");
    put_u32(out, std::bit_cast<std::uint32_t>(value));
    return out;
}

void write_capture_record(std::ostream& out, const Bytes& datagram)
{
    Bytes header;
    put_u32(header, static_cast<std::uint32_t>(datagram.size()));
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(datagram.data()), static_cast<std::streamsize>(datagram.size()));
}

std::vector<Bytes> read_capture(std::istream& in)
{
    std::vector<Bytes> out;
    while (true) {
        unsigned char header[4];
        in.read(reinterpret_cast<char*>(header), 4);
        if (in.gcount() == 0) break;
        if (in.gcount() != 4) throw Error("truncated capture record header");
        const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                                  (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
        Bytes datagram(len);
        in.read(reinterpret_cast<char*>(datagram.data()), len);
        if (static_cast<std::uint32_t>(in.gcount()) != len) throw Error("truncated capture record body");
        out.push_back(std::move(datagram));
    }
    return out;
}

} // namespace bodyctl
