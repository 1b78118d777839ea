#pragma once

#include <stdexcept>
#include <string>

namespace emcc {

// Every failure raised by the library derives from Error so callers can
// catch one type at the boundary (the CLI maps it to exit code 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EMCC_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

EMCC_DEFINE_ERROR(ParseError);
EMCC_DEFINE_ERROR(RangeError);
EMCC_DEFINE_ERROR(IoError);
EMCC_DEFINE_ERROR(LengthError);
EMCC_DEFINE_ERROR(ParamError);
EMCC_DEFINE_ERROR(KeyMismatch);
EMCC_DEFINE_ERROR(EmptyTemplate);
EMCC_DEFINE_ERROR(EmptyScores);
EMCC_DEFINE_ERROR(DatasetShapeError);
EMCC_DEFINE_ERROR(MagicError);
EMCC_DEFINE_ERROR(VersionError);
EMCC_DEFINE_ERROR(TruncationError);
EMCC_DEFINE_ERROR(FormatError);
EMCC_DEFINE_ERROR(SameSeedError);
EMCC_DEFINE_ERROR(ConfigError);

#undef EMCC_DEFINE_ERROR

}  // namespace emcc
