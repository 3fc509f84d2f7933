#pragma once

// Single point of truth for the cpp-httplib build configuration. Every TU
// that touches httplib.h must include it through this header, otherwise the
// library is compiled with two different layouts.
#ifdef HANDCONTACT_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
