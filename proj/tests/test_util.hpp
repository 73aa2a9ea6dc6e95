#pragma once

#include <gtest/gtest.h>

#include "ohca/error.hpp"

// Kind of the ohca::Error thrown by f, recording a failure if none is thrown.
template <typename F>
ohca::ErrorKind error_of(F&& f) {
  try {
    f();
  } catch (const ohca::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an ohca::Error";
  return ohca::ErrorKind::IoError;
}
