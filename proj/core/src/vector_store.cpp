#include "fusionkit/vector_store.hpp"

#include "fusionkit/embedding.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/strings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace fusionkit::embedding {
namespace {

constexpr char kMagic[4] = {'F', 'V', 'S', '1'};

template <typename T>
void put_le(std::string& out, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
    }
}

class Reader {
public:
    Reader(std::string_view data, std::string path) : data_(data), path_(std::move(path)) {}

    template <typename T>
    T get_le()
    {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::string_view bytes(std::size_t n)
    {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] std::size_t offset() const { return pos_; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error(ErrorCode::CorruptStore, path_ + " @" + std::to_string(pos_) + ": " + what);
    }

private:
    void need(std::size_t n) const
    {
        if (data_.size() - pos_ < n) {
            fail("truncated header");
        }
    }

    std::string_view data_;
    std::size_t pos_ = 0;
    std::string path_;
};

VectorStore::Header parse_header(Reader& r)
{
    const auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        r.fail("bad magic");
    }
    if (r.get_le<std::uint32_t>() != VectorStore::kVersion) {
        r.fail("unsupported version");
    }
    VectorStore::Header h;
    const auto id_len = r.get_le<std::uint32_t>();
    if (id_len == 0 || id_len > 4096) {
        r.fail("bad model_id length");
    }
    h.model_id = std::string(r.bytes(id_len));
    h.dim = r.get_le<std::uint32_t>();
    h.count = r.get_le<std::uint64_t>();
    if (h.dim == 0) {
        r.fail("zero dim");
    }
    return h;
}

} // namespace

VectorStore::VectorStore(std::string model_id, std::size_t dim) : model_id_(std::move(model_id)), dim_(dim)
{
    if (dim_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "vector store dim must be > 0");
    }
    if (model_id_.empty() || model_id_.find_first_of("/\\\n\t ") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "invalid model_id '" + model_id_ + "'");
    }
}

void VectorStore::reserve(std::size_t rows)
{
    block_.reserve(rows * dim_);
    ids_.reserve(rows);
    index_.reserve(rows);
}

void VectorStore::append(std::string keyframe_id, std::span<const float> values)
{
    if (values.size() != dim_) {
        throw Error(ErrorCode::DimMismatch, "vector dim " + std::to_string(values.size()) + " != store dim " +
                                                std::to_string(dim_));
    }
    for (const float v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteOutput, "vector for " + keyframe_id + " has non-finite components");
        }
    }
    if (!is_unit(values)) {
        throw Error(ErrorCode::InvalidArgument, "vector for " + keyframe_id + " is not unit norm");
    }
    if (keyframe_id.empty() || keyframe_id.find_first_of("\n\r") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "invalid keyframe_id");
    }
    if (index_.contains(keyframe_id)) {
        throw Error(ErrorCode::DuplicateKeyframe, "keyframe " + keyframe_id + " already stored in " + model_id_);
    }
    index_.emplace(keyframe_id, ids_.size());
    ids_.push_back(std::move(keyframe_id));
    block_.insert(block_.end(), values.begin(), values.end());
}

std::optional<std::size_t> VectorStore::find(std::string_view keyframe_id) const
{
    const auto it = index_.find(std::string(keyframe_id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::span<const float> VectorStore::get(std::string_view keyframe_id) const
{
    const auto i = find(keyframe_id);
    if (!i) {
        throw Error(ErrorCode::UnknownKeyframe, "keyframe " + std::string(keyframe_id) + " not in " + model_id_);
    }
    return row(*i);
}

std::filesystem::path VectorStore::vectors_path(const std::filesystem::path& dir, const std::string& model_id)
{
    return dir / (model_id + ".fvs");
}

std::filesystem::path VectorStore::ids_path(const std::filesystem::path& dir, const std::string& model_id)
{
    return dir / (model_id + ".ids");
}

void VectorStore::save(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    std::string out;
    out.reserve(64 + model_id_.size() + block_.size() * sizeof(float));
    out.append(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model_id_.size()));
    out += model_id_;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ids_.size()));
    if constexpr (std::endian::native == std::endian::little) {
        out.append(reinterpret_cast<const char*>(block_.data()), block_.size() * sizeof(float));
    } else {
        for (const float v : block_) {
            put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
        }
    }

    std::string ids;
    for (const auto& id : ids_) {
        ids += id;
        ids += '\n';
    }
    strings::write_file_atomic(ids_path(dir, model_id_).string(), ids);
    strings::write_file_atomic(vectors_path(dir, model_id_).string(), out);
}

VectorStore::Header VectorStore::read_header(const std::filesystem::path& fvs_path)
{
    std::ifstream in(fvs_path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + fvs_path.string());
    }
    std::string head(4096 + 32, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    Reader r(head, fvs_path.string());
    return parse_header(r);
}

VectorStore VectorStore::load(const std::filesystem::path& dir, const std::string& model_id)
{
    const auto vec_path = vectors_path(dir, model_id);
    const std::string data = strings::read_file(vec_path.string());
    Reader r(data, vec_path.string());
    const auto header = parse_header(r);
    if (header.model_id != model_id) {
        r.fail("model_id '" + header.model_id + "' does not match '" + model_id + "'");
    }
    const std::uint64_t payload = header.count * header.dim * sizeof(float);
    if (r.remaining() != payload) {
        r.fail("payload is " + std::to_string(r.remaining()) + " bytes, header implies " + std::to_string(payload));
    }

    const std::string ids_text = strings::read_file(ids_path(dir, model_id).string());
    if (!ids_text.empty() && ids_text.back() != '\n') {
        throw Error(ErrorCode::CorruptStore, ids_path(dir, model_id).string() + ": truncated id list");
    }
    const auto ids = strings::lines(ids_text);
    if (ids.size() != header.count) {
        throw Error(ErrorCode::CorruptStore, ids_path(dir, model_id).string() + ": " + std::to_string(ids.size()) +
                                                 " ids for " + std::to_string(header.count) + " rows");
    }

    VectorStore store(model_id, header.dim);
    store.reserve(header.count);
    const auto payload_bytes = r.bytes(payload);
    std::vector<float> row(header.dim);
    for (std::uint64_t i = 0; i < header.count; ++i) {
        std::memcpy(row.data(), payload_bytes.data() + i * header.dim * sizeof(float), header.dim * sizeof(float));
        if constexpr (std::endian::native != std::endian::little) {
            for (auto& v : row) {
                auto u = std::bit_cast<std::uint32_t>(v);
                u = ((u & 0xffu) << 24) | ((u & 0xff00u) << 8) | ((u >> 8) & 0xff00u) | (u >> 24);
                v = std::bit_cast<float>(u);
            }
        }
        try {
            store.append(std::string(ids[i]), row);
        } catch (const Error& e) {
            throw Error(ErrorCode::CorruptStore, vec_path.string() + " row " + std::to_string(i) + ": " + e.what());
        }
    }
    return store;
}

} // namespace fusionkit::embedding
