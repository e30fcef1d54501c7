#include "campro/npy.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>

#include "campro/error.hpp"

namespace campro {
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "NPY IO assumes a little-endian host");

namespace {

constexpr std::uint8_t kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreludeSize = 10;  // magic + version + u16 header length
constexpr std::size_t kAlign = 64;
constexpr std::size_t kGrowthAxisDigits = 21;

std::vector<std::uint8_t> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::string shape_repr(const std::vector<std::uint64_t>& shape) {
    if (shape.empty()) return "()";
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    if (shape.size() == 1) s += ",";
    return s + ")";
}

// Just enough of the Python literal grammar for NPY header dictionaries.
class HeaderParser {
public:
    HeaderParser(std::string_view text, const std::string& source) : text_(text), source_(source) {}

    struct Value {
        std::optional<std::string> str;
        std::optional<bool> boolean;
        std::optional<std::vector<std::uint64_t>> tuple;
    };

    std::map<std::string, Value> parse() {
        std::map<std::string, Value> out;
        expect('{');
        while (true) {
            skip();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            std::string key = quoted();
            expect(':');
            out[key] = value();
            skip();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect('}');
            break;
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(source_ + ": malformed NPY header (" + what + ")");
    }
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end");
        return text_[pos_];
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string quoted() {
        const char q = peek();
        if (q != '\'' && q != '"') fail("expected string");
        const std::size_t end = text_.find(q, pos_ + 1);
        if (end == std::string_view::npos) fail("unterminated string");
        std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return s;
    }
    Value value() {
        Value v;
        const char c = peek();
        if (c == '\'' || c == '"') {
            v.str = quoted();
        } else if (text_.substr(pos_, 4) == "True") {
            v.boolean = true;
            pos_ += 4;
        } else if (text_.substr(pos_, 5) == "False") {
            v.boolean = false;
            pos_ += 5;
        } else if (c == '(' || c == '[') {
            const char close = c == '(' ? ')' : ']';
            ++pos_;
            std::vector<std::uint64_t> dims;
            while (true) {
                if (peek() == close) {
                    ++pos_;
                    break;
                }
                std::size_t start = pos_;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
                // numpy may write Python long suffixes on old files
                const std::string digits(text_.substr(start, pos_ - start));
                if (digits.empty()) fail("expected dimension");
                if (pos_ < text_.size() && (text_[pos_] == 'L' || text_[pos_] == 'l')) ++pos_;
                dims.push_back(std::stoull(digits));
                if (peek() == ',') ++pos_;
            }
            v.tuple = std::move(dims);
        } else {
            fail("unsupported value");
        }
        return v;
    }

    std::string_view text_;
    const std::string& source_;
    std::size_t pos_ = 0;
};

std::optional<DType> parse_descr(const std::string& d) {
    if (d == "|u1" || d == "<u1" || d == "u1" || d == "=u1") return DType::U8;
    if (d == "<f4") return DType::F32;
    if (d == "<f8") return DType::F64;
    return std::nullopt;
}

// --- zip plumbing -----------------------------------------------------------

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t at, int n, const std::string& src) {
    if (at + n > b.size()) throw FormatError(src + ": truncated zip structure");
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[at + i];
    return v;
}

}  // namespace

std::size_t element_size(DType dtype) noexcept {
    switch (dtype) {
        case DType::U8: return 1;
        case DType::F32: return 4;
        case DType::F64: return 8;
    }
    return 0;
}

std::string_view descr(DType dtype) noexcept {
    switch (dtype) {
        case DType::U8: return "|u1";
        case DType::F32: return "<f4";
        case DType::F64: return "<f8";
    }
    return "";
}

std::uint64_t ArrayRecord::element_count() const noexcept {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void ArrayRecord::validate() const {
    const std::uint64_t expected = element_count() * element_size(dtype);
    if (bytes.size() != expected) {
        throw FormatError("array '" + name + "': buffer holds " + std::to_string(bytes.size()) +
                          " bytes, shape requires " + std::to_string(expected));
    }
}

std::vector<double> ArrayRecord::to_doubles() const {
    validate();
    const std::size_t n = static_cast<std::size_t>(element_count());
    std::vector<double> out(n);
    switch (dtype) {
        case DType::U8:
            std::copy(bytes.begin(), bytes.end(), out.begin());
            break;
        case DType::F32:
            for (std::size_t i = 0; i < n; ++i) {
                float f;
                std::memcpy(&f, bytes.data() + 4 * i, 4);
                out[i] = f;
            }
            break;
        case DType::F64:
            std::memcpy(out.data(), bytes.data(), 8 * n);
            break;
    }
    return out;
}

ArrayRecord ArrayRecord::from_doubles(std::string name, DType dtype, std::vector<std::uint64_t> shape,
                                      std::span<const double> values) {
    ArrayRecord rec{std::move(name), dtype, std::move(shape), {}};
    if (rec.element_count() != values.size()) {
        throw FormatError("array '" + rec.name + "': " + std::to_string(values.size()) +
                          " values do not fill shape " + shape_repr(rec.shape));
    }
    rec.bytes.resize(values.size() * element_size(dtype));
    switch (dtype) {
        case DType::U8:
            for (std::size_t i = 0; i < values.size(); ++i) {
                rec.bytes[i] = static_cast<std::uint8_t>(std::clamp(values[i], 0.0, 255.0));
            }
            break;
        case DType::F32:
            for (std::size_t i = 0; i < values.size(); ++i) {
                const auto f = static_cast<float>(values[i]);
                std::memcpy(rec.bytes.data() + 4 * i, &f, 4);
            }
            break;
        case DType::F64:
            std::memcpy(rec.bytes.data(), values.data(), rec.bytes.size());
            break;
    }
    return rec;
}

ArrayRecord ArrayRecord::from_u8(std::string name, std::vector<std::uint64_t> shape,
                                 std::span<const std::uint8_t> values) {
    ArrayRecord rec{std::move(name), DType::U8, std::move(shape),
                    std::vector<std::uint8_t>(values.begin(), values.end())};
    rec.validate();
    return rec;
}

std::vector<std::uint8_t> encode_npy(const ArrayRecord& rec) {
    rec.validate();
    std::string header = "{'descr': '" + std::string(descr(rec.dtype)) +
                         "', 'fortran_order': False, 'shape': " + shape_repr(rec.shape) + ", }";
    if (!rec.shape.empty()) {
        const std::size_t digits = std::to_string(rec.shape.front()).size();
        if (digits < kGrowthAxisDigits) header.append(kGrowthAxisDigits - digits, ' ');
    }
    const std::size_t hlen = header.size() + 1;
    const std::size_t pad = kAlign - ((kPreludeSize + hlen) % kAlign);
    header.append(pad, ' ');
    header.push_back('\n');
    if (header.size() > 0xFFFF) throw FormatError("NPY header too large for version 1.0");

    std::vector<std::uint8_t> out(kPreludeSize + header.size() + rec.bytes.size());
    std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
    out[6] = 1;
    out[7] = 0;
    out[8] = static_cast<std::uint8_t>(header.size() & 0xFF);
    out[9] = static_cast<std::uint8_t>(header.size() >> 8);
    std::copy(header.begin(), header.end(), out.begin() + kPreludeSize);
    std::copy(rec.bytes.begin(), rec.bytes.end(), out.begin() + kPreludeSize + header.size());
    return out;
}

ArrayRecord decode_npy(std::span<const std::uint8_t> file, const std::string& source) {
    if (file.size() < kPreludeSize || !std::equal(std::begin(kMagic), std::end(kMagic), file.begin())) {
        throw FormatError(source + ": bad magic, not an NPY file");
    }
    if (file[6] != 1 || file[7] != 0) {
        throw FormatError(source + ": unsupported NPY version " + std::to_string(file[6]) + "." +
                          std::to_string(file[7]));
    }
    const std::size_t hlen = file[8] | (static_cast<std::size_t>(file[9]) << 8);
    if (file.size() < kPreludeSize + hlen) {
        throw FormatError(source + ": truncated header");
    }
    const std::string_view text(reinterpret_cast<const char*>(file.data() + kPreludeSize), hlen);
    const auto dict = HeaderParser(text, source).parse();

    auto field = [&](const char* key) -> const HeaderParser::Value& {
        const auto it = dict.find(key);
        if (it == dict.end()) throw FormatError(source + ": header lacks '" + key + "'");
        return it->second;
    };
    const auto& d = field("descr");
    const auto& f = field("fortran_order");
    const auto& s = field("shape");
    if (!d.str || !f.boolean || !s.tuple) throw FormatError(source + ": header field of wrong type");
    const auto dtype = parse_descr(*d.str);
    if (!dtype) throw FormatError(source + ": unsupported dtype '" + *d.str + "'");
    if (*f.boolean) throw FormatError(source + ": fortran_order arrays are not supported");

    ArrayRecord rec{fs::path(source).stem().string(), *dtype, *s.tuple, {}};
    const std::uint64_t expected = rec.element_count() * element_size(rec.dtype);
    const std::size_t available = file.size() - kPreludeSize - hlen;
    if (available < expected) {
        throw FormatError(source + ": truncated data, expected " + std::to_string(expected) +
                          " bytes but found " + std::to_string(available));
    }
    const auto* begin = file.data() + kPreludeSize + hlen;
    rec.bytes.assign(begin, begin + expected);
    return rec;
}

void write_array(const ArrayRecord& rec, const fs::path& path) { spit(path, encode_npy(rec)); }

ArrayRecord read_array(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
    ArrayRecord rec = decode_npy(slurp(path), path.string());
    rec.name = path.stem().string();
    return rec;
}

void write_npz(const std::vector<ArrayRecord>& records, const fs::path& path) {
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> central;
    constexpr std::uint16_t kDosTime = 0;
    constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
    for (const auto& rec : records) {
        const auto payload = encode_npy(rec);
        const std::string member = rec.name + ".npy";
        const auto crc = static_cast<std::uint32_t>(
            crc32(0L, payload.data(), static_cast<uInt>(payload.size())));
        if (payload.size() >= 0xFFFFFFFFu || out.size() >= 0xFFFFFFFFu) {
            throw FormatError("npz member too large: " + member);
        }
        const auto offset = static_cast<std::uint32_t>(out.size());
        const auto size = static_cast<std::uint32_t>(payload.size());

        put32(out, 0x04034b50);
        put16(out, 20);
        put16(out, 0);
        put16(out, 0);  // stored
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, size);
        put32(out, size);
        put16(out, static_cast<std::uint16_t>(member.size()));
        put16(out, 0);
        out.insert(out.end(), member.begin(), member.end());
        out.insert(out.end(), payload.begin(), payload.end());

        put32(central, 0x02014b50);
        put16(central, 20);
        put16(central, 20);
        put16(central, 0);
        put16(central, 0);
        put16(central, kDosTime);
        put16(central, kDosDate);
        put32(central, crc);
        put32(central, size);
        put32(central, size);
        put16(central, static_cast<std::uint16_t>(member.size()));
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central.insert(central.end(), member.begin(), member.end());
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out.insert(out.end(), central.begin(), central.end());
    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(records.size()));
    put16(out, static_cast<std::uint16_t>(records.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    spit(path, out);
}

std::vector<ArrayRecord> read_npz(const fs::path& path) {
    const auto file = slurp(path);
    const std::span<const std::uint8_t> b(file);
    const std::string src = path.string();
    if (b.size() < 22) throw FormatError(src + ": too small to be a zip archive");

    std::size_t eocd = std::string::npos;
    for (std::size_t i = b.size() - 22 + 1; i-- > 0;) {
        if (get_le(b, i, 4, src) == 0x06054b50) {
            eocd = i;
            break;
        }
        if (b.size() - i > 22 + 0xFFFF) break;
    }
    if (eocd == std::string::npos) throw FormatError(src + ": no zip end-of-central-directory");

    std::uint64_t entries = get_le(b, eocd + 10, 2, src);
    std::uint64_t cd_offset = get_le(b, eocd + 16, 4, src);
    if (cd_offset == 0xFFFFFFFF || entries == 0xFFFF) {
        // zip64 locator sits right before the classic record
        if (eocd < 20 || get_le(b, eocd - 20, 4, src) != 0x07064b50) {
            throw FormatError(src + ": zip64 locator missing");
        }
        const std::uint64_t z64 = get_le(b, eocd - 20 + 8, 8, src);
        if (get_le(b, z64, 4, src) != 0x06064b50) throw FormatError(src + ": bad zip64 record");
        entries = get_le(b, z64 + 32, 8, src);
        cd_offset = get_le(b, z64 + 48, 8, src);
    }

    std::vector<ArrayRecord> out;
    std::size_t p = static_cast<std::size_t>(cd_offset);
    for (std::uint64_t e = 0; e < entries; ++e) {
        if (get_le(b, p, 4, src) != 0x02014b50) throw FormatError(src + ": bad central directory");
        const auto method = get_le(b, p + 10, 2, src);
        std::uint64_t csize = get_le(b, p + 20, 4, src);
        std::uint64_t usize = get_le(b, p + 24, 4, src);
        const auto name_len = get_le(b, p + 28, 2, src);
        const auto extra_len = get_le(b, p + 30, 2, src);
        const auto comment_len = get_le(b, p + 32, 2, src);
        std::uint64_t local = get_le(b, p + 42, 4, src);
        const std::string member(reinterpret_cast<const char*>(b.data() + p + 46), name_len);

        // zip64 extended information: present fields follow the 0xFFFFFFFF markers in order
        std::size_t x = p + 46 + name_len;
        const std::size_t x_end = x + extra_len;
        while (x + 4 <= x_end) {
            const auto id = get_le(b, x, 2, src);
            const auto len = get_le(b, x + 2, 2, src);
            if (id == 0x0001) {
                std::size_t q = x + 4;
                if (usize == 0xFFFFFFFF) { usize = get_le(b, q, 8, src); q += 8; }
                if (csize == 0xFFFFFFFF) { csize = get_le(b, q, 8, src); q += 8; }
                if (local == 0xFFFFFFFF) { local = get_le(b, q, 8, src); q += 8; }
            }
            x += 4 + len;
        }
        p = x_end + comment_len;

        if (get_le(b, local, 4, src) != 0x04034b50) throw FormatError(src + ": bad local header");
        const auto lname = get_le(b, local + 26, 2, src);
        const auto lextra = get_le(b, local + 28, 2, src);
        const std::size_t data_at = static_cast<std::size_t>(local + 30 + lname + lextra);
        if (data_at + csize > b.size()) throw FormatError(src + ": member " + member + " truncated");

        std::vector<std::uint8_t> payload;
        if (method == 0) {
            payload.assign(b.begin() + data_at, b.begin() + data_at + csize);
        } else if (method == 8) {
            payload.resize(usize);
            z_stream zs{};
            if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw FormatError(src + ": inflate init failed");
            zs.next_in = const_cast<Bytef*>(b.data() + data_at);
            zs.avail_in = static_cast<uInt>(csize);
            zs.next_out = payload.data();
            zs.avail_out = static_cast<uInt>(payload.size());
            const int rc = inflate(&zs, Z_FINISH);
            inflateEnd(&zs);
            if (rc != Z_STREAM_END) throw FormatError(src + ": corrupt deflate stream in " + member);
        } else {
            throw FormatError(src + ": unsupported zip compression method " + std::to_string(method));
        }
        ArrayRecord rec = decode_npy(payload, src + ":" + member);
        rec.name = member.size() > 4 && member.ends_with(".npy") ? member.substr(0, member.size() - 4)
                                                                 : member;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace campro
