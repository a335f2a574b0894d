method offset_mul(a: int, b: int) returns (r: int)
  ensures r == a * b + 4
{
  r := a * b + 4;
}
