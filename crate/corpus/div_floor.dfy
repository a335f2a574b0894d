method div_floor(a: int, b: int) returns (q: int)
  requires b > 0
  requires a >= 0
  ensures q * b <= a
  ensures a < q * b + b
{
  return a / b;
}
