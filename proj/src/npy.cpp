#include "netscope/npy.hpp"

#include "netscope/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

namespace netscope::npy {

namespace {

static_assert(std::endian::native == std::endian::little,
              "npy I/O assumes a little-endian host");

constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

Header parse_dict(const std::string& dict, const std::filesystem::path& path) {
    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex fortran_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");

    std::smatch m;
    Header h{};
    if (!std::regex_search(dict, m, descr_re))
        throw InputError(path.string() + ": npy header has no descr");
    h.dtype = parse_descr(m[1].str());
    if (!std::regex_search(dict, m, fortran_re))
        throw InputError(path.string() + ": npy header has no fortran_order");
    h.fortran_order = m[1].str() == "True";
    if (!std::regex_search(dict, m, shape_re))
        throw InputError(path.string() + ": npy header has no shape");

    std::stringstream ss(m[1].str());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (const std::exception&) {
            throw InputError(path.string() + ": bad shape entry '" + tok + "'");
        }
        if (pos != tok.size())
            throw InputError(path.string() + ": bad shape entry '" + tok + "'");
        h.shape.push_back(static_cast<std::size_t>(v));
    }
    return h;
}

Header read_header_stream(std::istream& in, const std::filesystem::path& path) {
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw InputError(path.string() + ": not an npy file");

    unsigned char version[2];
    in.read(reinterpret_cast<char*>(version), 2);
    if (!in) throw InputError(path.string() + ": truncated npy header");

    std::uint32_t header_len = 0;
    if (version[0] == 1) {
        std::uint16_t len16 = 0;
        in.read(reinterpret_cast<char*>(&len16), 2);
        header_len = len16;
    } else if (version[0] == 2 || version[0] == 3) {
        in.read(reinterpret_cast<char*>(&header_len), 4);
    } else {
        throw InputError(path.string() + ": unsupported npy version " +
                         std::to_string(version[0]));
    }
    if (!in) throw InputError(path.string() + ": truncated npy header");

    std::string dict(header_len, '\0');
    in.read(dict.data(), header_len);
    if (!in) throw InputError(path.string() + ": truncated npy header");

    Header h = parse_dict(dict, path);
    if (h.fortran_order)
        throw InputError(path.string() + ": fortran_order arrays are not supported");
    return h;
}

std::string header_bytes(Dtype dt, const std::vector<std::size_t>& shape) {
    std::string shape_str = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        shape_str += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) shape_str += ",";
        if (i + 1 < shape.size()) shape_str += " ";
    }
    shape_str += ")";

    std::string dict = "{'descr': '" + descr(dt) + "', 'fortran_order': False, 'shape': " +
                       shape_str + ", }";
    // magic(6) + version(2) + len(2) + dict + '\n' padded to a multiple of 64.
    std::size_t total = 10 + dict.size() + 1;
    std::size_t padded = (total + 63) / 64 * 64;
    dict.append(padded - total, ' ');
    dict.push_back('\n');

    std::string out(kMagic.begin(), kMagic.end());
    out.push_back('\x01');
    out.push_back('\x00');
    auto len = static_cast<std::uint16_t>(dict.size());
    out.push_back(static_cast<char>(len & 0xff));
    out.push_back(static_cast<char>(len >> 8));
    out += dict;
    return out;
}

void write_raw(const std::filesystem::path& path, Dtype dt, const std::vector<std::size_t>& shape,
               const void* data) {
    std::size_t count = 1;
    for (auto s : shape) count *= s;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    const std::string header = header_bytes(dt, shape);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(count * item_size(dt)));
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string descr(Dtype dt) {
    switch (dt) {
        case Dtype::f4: return "<f4";
        case Dtype::f8: return "<f8";
        case Dtype::i4: return "<i4";
        case Dtype::i8: return "<i8";
    }
    return "<f8";
}

Dtype parse_descr(const std::string& d) {
    if (d.size() != 3 || (d[0] != '<' && d[0] != '='))
        throw InputError("unsupported npy dtype '" + d + "' (little-endian f4/f8/i4/i8 only)");
    const std::string t = d.substr(1);
    if (t == "f4") return Dtype::f4;
    if (t == "f8") return Dtype::f8;
    if (t == "i4") return Dtype::i4;
    if (t == "i8") return Dtype::i8;
    throw InputError("unsupported npy dtype '" + d + "' (little-endian f4/f8/i4/i8 only)");
}

std::size_t item_size(Dtype dt) {
    return (dt == Dtype::f4 || dt == Dtype::i4) ? 4 : 8;
}

std::size_t Array::size() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

Header read_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing file '" + path.string() + "'");
    return read_header_stream(in, path);
}

Array read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing file '" + path.string() + "'");
    Header h = read_header_stream(in, path);

    Array a;
    a.dtype = h.dtype;
    a.shape = h.shape;
    const std::size_t count = a.size();
    std::vector<char> raw(count * item_size(h.dtype));
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw InputError(path.string() + ": payload shorter than declared shape");

    a.values.resize(count);
    switch (h.dtype) {
        case Dtype::f8:
            std::memcpy(a.values.data(), raw.data(), raw.size());
            break;
        case Dtype::f4: {
            std::vector<float> tmp(count);
            std::memcpy(tmp.data(), raw.data(), raw.size());
            for (std::size_t i = 0; i < count; ++i) a.values[i] = tmp[i];
            break;
        }
        case Dtype::i4: {
            std::vector<std::int32_t> tmp(count);
            std::memcpy(tmp.data(), raw.data(), raw.size());
            a.ints.assign(tmp.begin(), tmp.end());
            break;
        }
        case Dtype::i8:
            a.ints.resize(count);
            std::memcpy(a.ints.data(), raw.data(), raw.size());
            break;
    }
    if (!a.ints.empty())
        for (std::size_t i = 0; i < count; ++i) a.values[i] = static_cast<double>(a.ints[i]);
    return a;
}

void write_f8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const double* data) {
    write_raw(path, Dtype::f8, shape, data);
}

void write_i8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::int64_t* data) {
    write_raw(path, Dtype::i8, shape, data);
}

}  // namespace netscope::npy
