#pragma once

#include <stdexcept>
#include <string>

namespace handcontact {

// Base for all domain errors. `kind()` is a stable machine-readable tag used
// by the CLI error summary.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define HANDCONTACT_DEFINE_ERROR(Name)                                 \
    class Name : public Error {                                       \
    public:                                                            \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}   \
    };

HANDCONTACT_DEFINE_ERROR(ParseError)
HANDCONTACT_DEFINE_ERROR(IoError)
HANDCONTACT_DEFINE_ERROR(TopologyError)
HANDCONTACT_DEFINE_ERROR(PartitionError)
HANDCONTACT_DEFINE_ERROR(GridMismatchError)
HANDCONTACT_DEFINE_ERROR(UnknownPartError)
HANDCONTACT_DEFINE_ERROR(ShapeError)
HANDCONTACT_DEFINE_ERROR(DisconnectedPartError)
HANDCONTACT_DEFINE_ERROR(SeedNotInPartError)
HANDCONTACT_DEFINE_ERROR(RenderError)
HANDCONTACT_DEFINE_ERROR(TemplateError)
HANDCONTACT_DEFINE_ERROR(MissingContextError)
HANDCONTACT_DEFINE_ERROR(TransportError)
HANDCONTACT_DEFINE_ERROR(AuthError)
HANDCONTACT_DEFINE_ERROR(BackendFormatError)
HANDCONTACT_DEFINE_ERROR(EncodeError)
HANDCONTACT_DEFINE_ERROR(UnknownModelError)
HANDCONTACT_DEFINE_ERROR(LengthMismatchError)
HANDCONTACT_DEFINE_ERROR(EmptyDatasetError)
HANDCONTACT_DEFINE_ERROR(MissingImageError)
HANDCONTACT_DEFINE_ERROR(ConfigError)

#undef HANDCONTACT_DEFINE_ERROR

} // namespace handcontact
