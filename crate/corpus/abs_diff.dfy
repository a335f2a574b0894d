method abs_diff(a: int, b: int) returns (d: int)
  ensures a >= b ==> d == a - b
  ensures a < b ==> d == b - a
{
  if (a >= b) {
    return a - b;
  } else {
    return b - a;
  }
}
