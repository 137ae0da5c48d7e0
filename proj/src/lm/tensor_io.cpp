#include "lordd/lm/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "lordd/error.hpp"

namespace lordd::lm {

namespace {

constexpr std::array<char, 4> kMagic = {'L', 'R', 'D', 'T'};

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const MatrixF& m) {
    std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
    put_u32(buf, 2);
    put_u32(buf, static_cast<std::uint32_t>(m.rows()));
    put_u32(buf, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u32(buf, std::bit_cast<std::uint32_t>(m.data()[i]));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write tensor " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

MatrixF read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto fail = [&](const std::string& why) { return ParseError("tensor " + path.string() + ": " + why); };
    if (buf.size() < 8 || !std::equal(kMagic.begin(), kMagic.end(), buf.begin())) throw fail("bad magic");
    const std::uint32_t rank = get_u32(&buf[4]);
    if (rank < 1 || rank > 2) throw fail("unsupported rank " + std::to_string(rank));
    if (buf.size() < 8 + 4 * rank) throw fail("truncated header");
    const std::uint32_t rows = get_u32(&buf[8]);
    const std::uint32_t cols = rank == 2 ? get_u32(&buf[12]) : 1;
    const std::size_t offset = 8 + 4 * rank;
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    if (buf.size() != offset + 4 * count) throw fail("payload size mismatch");
    MatrixF m(rows, cols);
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = std::bit_cast<float>(get_u32(&buf[offset + 4 * i]));
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    for (const auto& [k, v] : m) out << k << '=' << v << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

const std::string& manifest_get(const Manifest& m, const std::string& key, const std::filesystem::path& where) {
    const auto it = m.find(key);
    if (it == m.end()) throw ParseError(where.string() + ": missing key '" + key + "'");
    return it->second;
}

}  // namespace lordd::lm
